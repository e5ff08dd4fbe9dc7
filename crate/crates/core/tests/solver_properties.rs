mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use thinfiber::fem::{Lame, MaterialParams};
use thinfiber::solver::{
    apply_reduced_operator, cg_solve, dense_block_solve, solve_coupled, Jacobi, ReducedOperator, SolveOptions,
};

fn instance() -> Coupled {
    let net = single_fiber([0.1, 0.3, 0.6], [0.9, 0.7, 0.4], 0.05);
    assemble(1, &net, 1, &stiff_fibers())
}

/// `A + Bᵀ L⁻¹ K L⁻¹ B` formed densely with an LU inverse of `L`.
fn dense_reduced(c: &Coupled) -> DMatrix<f64> {
    let b = c.b.to_dense();
    let linv = c.l.to_dense().try_inverse().unwrap();
    let p = &linv * &b;
    c.a.to_dense() + p.transpose() * c.k.to_dense() * p
}

#[test]
fn reduced_operator_matches_dense_assembly() {
    let c = instance();
    let op = ReducedOperator::new(&c.a, &c.k, &c.b, &c.l).unwrap();
    let dense = dense_reduced(&c);
    let mut r = rng(5);
    for _ in 0..5 {
        let x = random_vector(&mut r, c.a.rows());
        let y = apply_reduced_operator(&op, &x).unwrap();
        let want = &dense * DVector::from_column_slice(&x);
        let scale = want.amax();
        assert!(max_diff(&y, want.as_slice()) <= 1e-10 * scale);
    }
}

#[test]
fn reduced_operator_symmetric_positive() {
    let c = assemble(2, &four_fibers(0.04), 2, &stiff_fibers());
    let op = ReducedOperator::new(&c.a, &c.k, &c.b, &c.l).unwrap();
    let mut r = rng(11);
    for _ in 0..20 {
        let x = random_vector(&mut r, c.a.rows());
        let y = random_vector(&mut r, c.a.rows());
        let ax = apply_reduced_operator(&op, &x).unwrap();
        let ay = apply_reduced_operator(&op, &y).unwrap();
        let (xay, yax) = (dot(&ay, &x), dot(&ax, &y));
        assert!((xay - yax).abs() <= 1e-10 * xay.abs().max(yax.abs()));
        assert!(dot(&ax, &x) > 0.0);
    }
}

#[test]
fn constant_fiber_lift_sees_only_a() {
    let c = instance();
    let op = ReducedOperator::new(&c.a, &c.k, &c.b, &c.l).unwrap();
    // a rigid translation projects to constant fiber values, which K annihilates
    let x: Vec<f64> = (0..c.a.rows()).map(|i| [0.3, -0.2, 0.7][i % 3]).collect();
    let y = apply_reduced_operator(&op, &x).unwrap();
    let ax = c.a.mul_vec(&x);
    assert!(max_diff(&y, &ax) <= 1e-9 * max_abs(&ax).max(1.0));
}

#[test]
fn schur_path_matches_block_solve() {
    for (net, level, refine) in [
        (single_fiber([0.1, 0.3, 0.6], [0.9, 0.7, 0.4], 0.05), 1, 1),
        (single_fiber([0.2, 0.5, 0.5], [0.8, 0.5, 0.5], 0.05), 1, 0),
    ] {
        let c = assemble(level, &net, refine, &stiff_fibers());
        let opts = SolveOptions {
            tol: 1e-13,
            ..SolveOptions::default()
        };
        let sol = solve_coupled(&c.a, &c.k, &c.b, &c.l, &c.rhs, &opts).unwrap();
        let (u, w, lambda) = dense_block_solve(&c.a, &c.k, &c.b, &c.l, &c.rhs).unwrap();
        assert!(max_diff(&sol.u, &u) <= 1e-8 * max_abs(&u));
        assert!(max_diff(&sol.w, &w) <= 1e-8 * max_abs(&w));
        assert!(max_diff(&sol.lambda, &lambda) <= 1e-8 * max_abs(&lambda));
    }
}

#[test]
fn constraint_and_multiplier_residuals() {
    let c = assemble(2, &four_fibers(0.04), 2, &stiff_fibers());
    let sol = solve_coupled(&c.a, &c.k, &c.b, &c.l, &c.rhs, &SolveOptions::default()).unwrap();
    let bu = c.b.mul_vec(&sol.u);
    let lw = c.l.mul_vec(&sol.w);
    let norm = |v: &[f64]| dot(v, v).sqrt();
    let diff: Vec<f64> = lw.iter().zip(&bu).map(|(a, b)| a - b).collect();
    assert!(norm(&diff) <= 1e-10 * norm(&bu));
    let kw = c.k.mul_vec(&sol.w);
    let ll = c.l.mul_vec(&sol.lambda);
    let diff: Vec<f64> = ll.iter().zip(&kw).map(|(a, b)| a - b).collect();
    assert!(norm(&diff) <= 1e-10 * norm(&kw));
    assert!(sol.stats().contains(&format!("iterations={}", sol.iterations)));
}

#[test]
fn zero_fiber_stiffness_decouples() {
    let mat = MaterialParams::new(Lame::new(0.4, 1.0), Lame::new(0.4, 1.0)).unwrap();
    let c = assemble(2, &four_fibers(0.04), 2, &mat);
    assert_eq!(c.k.max_abs(), 0.0);
    let sol = solve_coupled(&c.a, &c.k, &c.b, &c.l, &c.rhs, &SolveOptions::default()).unwrap();
    let plain = cg_solve(&c.a, &Jacobi::new(&c.a.diagonal()), &c.rhs, None, 1e-12, 20_000, "plain").unwrap();
    assert!(max_diff(&sol.u, &plain.x) <= 1e-9);
    assert!(max_abs(&sol.lambda) <= 1e-9);
}

#[test]
fn zero_load_gives_zero_solution() {
    let c = instance();
    let zero = vec![0.0; c.a.rows()];
    let sol = solve_coupled(&c.a, &c.k, &c.b, &c.l, &zero, &SolveOptions::default()).unwrap();
    assert!(sol.u.iter().chain(&sol.w).chain(&sol.lambda).all(|&v| v == 0.0));
}

#[test]
fn solution_independent_of_initial_guess() {
    let c = assemble(2, &four_fibers(0.04), 2, &stiff_fibers());
    let op = ReducedOperator::new(&c.a, &c.k, &c.b, &c.l).unwrap();
    let pre = Jacobi::new(&op.jacobi_diagonal());
    let mut r = rng(3);
    let first = cg_solve(&op, &pre, &c.rhs, None, 1e-12, 20_000, "reduced").unwrap();
    for _ in 0..3 {
        let x0 = random_vector(&mut r, c.a.rows());
        let other = cg_solve(&op, &pre, &c.rhs, Some(&x0), 1e-12, 20_000, "reduced").unwrap();
        assert!(max_diff(&first.x, &other.x) <= 1e-8 * max_abs(&first.x));
    }
}

#[test]
fn solution_minimizes_energy() {
    let c = instance();
    let op = ReducedOperator::new(&c.a, &c.k, &c.b, &c.l).unwrap();
    let sol = solve_coupled(&c.a, &c.k, &c.b, &c.l, &c.rhs, &SolveOptions::default()).unwrap();
    let energy = |u: &[f64]| 0.5 * dot(&apply_reduced_operator(&op, u).unwrap(), u) - dot(&c.rhs, u);
    let e0 = energy(&sol.u);
    let mut r = rng(17);
    for _ in 0..10 {
        let d = random_vector(&mut r, c.a.rows());
        let trial: Vec<f64> = sol.u.iter().zip(&d).map(|(u, d)| u + 1e-3 * d).collect();
        assert!(energy(&trial) > e0);
    }
}
