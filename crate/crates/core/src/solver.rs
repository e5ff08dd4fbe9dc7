//! Matrix-free solution of the Schur-reduced system
//! `(A + Bᵀ L⁻¹ K L⁻¹ B) u = g` and recovery of the fiber displacement and
//! multiplier. The full three-block saddle-point system is only assembled
//! densely, as a reference for small instances.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fem::SparseMatrix;

/// Inner tolerance for the fiber mass solves.
pub const INNER_TOL: f64 = 1e-12;
/// Default outer tolerance for the reduced system.
pub const OUTER_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 20_000;

pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()>;
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.mul_vec_into(x, y);
        Ok(())
    }
}

pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

pub struct Identity;

impl Preconditioner for Identity {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

/// Diagonal scaling `z = r / d`.
#[derive(Debug, Clone)]
pub struct Jacobi {
    inv_diag: Vec<f64>,
}

impl Jacobi {
    pub fn new(diag: &[f64]) -> Self {
        Jacobi {
            inv_diag: diag.iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect(),
        }
    }
}

impl Preconditioner for Jacobi {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for ((zi, ri), di) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *zi = ri * di;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Relative residual `‖r_k‖/‖b‖` per iteration, starting with the initial guess.
    pub residuals: Vec<f64>,
}

impl CgOutcome {
    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Preconditioned conjugate gradients until `‖b − Ax‖ ≤ tol ‖b‖`.
pub fn cg_solve<O, P>(
    op: &O,
    precond: &P,
    rhs: &[f64],
    initial: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
    context: &'static str,
) -> Result<CgOutcome>
where
    O: LinearOperator + ?Sized,
    P: Preconditioner + ?Sized,
{
    let n = op.dim();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: rhs.len(),
        });
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::param("tol", format!("{tol} outside (0, 1)")));
    }
    let bnorm = norm(rhs);
    if bnorm == 0.0 {
        return Ok(CgOutcome {
            x: vec![0.0; n],
            iterations: 0,
            residuals: vec![0.0],
        });
    }
    let mut x = match initial {
        Some(x0) if x0.len() == n => x0.to_vec(),
        Some(x0) => {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: x0.len(),
            })
        }
        None => vec![0.0; n],
    };
    let mut r = rhs.to_vec();
    let mut q = vec![0.0; n];
    if initial.is_some() {
        op.apply(&x, &mut q)?;
        r.iter_mut().zip(&q).for_each(|(ri, qi)| *ri -= qi);
    }
    let mut residuals = vec![norm(&r) / bnorm];
    if residuals[0] <= tol {
        return Ok(CgOutcome {
            x,
            iterations: 0,
            residuals,
        });
    }
    let mut z = vec![0.0; n];
    precond.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        op.apply(&p, &mut q)?;
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(Error::NonConvergence {
                context,
                iterations: it,
                residual: *residuals.last().unwrap(),
                history: residuals,
            });
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        let rel = norm(&r) / bnorm;
        residuals.push(rel);
        if rel <= tol {
            return Ok(CgOutcome {
                x,
                iterations: it,
                residuals,
            });
        }
        precond.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NonConvergence {
        context,
        iterations: max_iter,
        residual: *residuals.last().unwrap(),
        history: residuals,
    })
}

/// `x ↦ A x + Bᵀ L⁻¹ K L⁻¹ B x`.
pub struct ReducedOperator<'a> {
    pub a: &'a SparseMatrix,
    pub k: &'a SparseMatrix,
    pub b: &'a SparseMatrix,
    pub l: &'a SparseMatrix,
    pub inner_tol: f64,
    l_precond: Jacobi,
}

impl<'a> ReducedOperator<'a> {
    pub fn new(a: &'a SparseMatrix, k: &'a SparseMatrix, b: &'a SparseMatrix, l: &'a SparseMatrix) -> Result<Self> {
        let n = a.rows();
        let m = l.rows();
        for (expected, actual) in [
            (n, a.cols()),
            (m, l.cols()),
            (m, k.rows()),
            (m, k.cols()),
            (m, b.rows()),
            (n, b.cols()),
        ] {
            if expected != actual {
                return Err(Error::DimensionMismatch { expected, actual });
            }
        }
        Ok(ReducedOperator {
            a,
            k,
            b,
            l,
            inner_tol: INNER_TOL,
            l_precond: Jacobi::new(&l.diagonal()),
        })
    }

    pub fn n_fiber_dofs(&self) -> usize {
        self.l.rows()
    }

    /// Solves `L y = r` on the fiber space.
    pub fn solve_mass(&self, r: &[f64]) -> Result<Vec<f64>> {
        Ok(cg_solve(self.l, &self.l_precond, r, None, self.inner_tol, DEFAULT_MAX_ITER, "fiber mass solve")?.x)
    }

    /// Fiber values `P_Γ u = L⁻¹ B u`.
    pub fn project(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.solve_mass(&self.b.mul_vec(u))
    }

    /// Jacobi diagonal: `diag(A)` plus `diag(Bᵀ D K D B)` with `D` the inverse
    /// row-sum-lumped fiber mass.
    pub fn jacobi_diagonal(&self) -> Vec<f64> {
        let mut diag = self.a.diagonal();
        if self.n_fiber_dofs() == 0 {
            return diag;
        }
        let lumped: Vec<f64> = (0..self.l.rows()).map(|r| self.l.row(r).map(|(_, v)| v).sum()).collect();
        let bt = self.b.transpose();
        let mut col = vec![0.0; self.l.rows()];
        for (j, dj) in diag.iter_mut().enumerate() {
            let entries: Vec<(usize, f64)> = bt.row(j).map(|(a, v)| (a, v / lumped[a])).collect();
            if entries.is_empty() {
                continue;
            }
            for &(a, v) in &entries {
                col[a] = v;
            }
            let mut acc = 0.0;
            for &(a, va) in &entries {
                let kc: f64 = self.k.row(a).map(|(c, kv)| kv * col[c]).sum();
                acc += va * kc;
            }
            for &(a, _) in &entries {
                col[a] = 0.0;
            }
            *dj += acc;
        }
        diag
    }
}

impl LinearOperator for ReducedOperator<'_> {
    fn dim(&self) -> usize {
        self.a.rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.a.mul_vec_into(x, y);
        if self.n_fiber_dofs() == 0 {
            return Ok(());
        }
        let w = self.project(x)?;
        let kw = self.k.mul_vec(&w);
        let lam = self.solve_mass(&kw)?;
        let back = self.b.mul_transpose_vec(&lam);
        y.iter_mut().zip(&back).for_each(|(yi, bi)| *yi += bi);
        Ok(())
    }
}

pub fn apply_reduced_operator(op: &ReducedOperator<'_>, x: &[f64]) -> Result<Vec<f64>> {
    let mut y = vec![0.0; op.dim()];
    op.apply(x, &mut y)?;
    Ok(y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledSolution {
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub lambda: Vec<f64>,
    pub iterations: usize,
    pub residuals: Vec<f64>,
}

impl CoupledSolution {
    /// Solver statistics as `key=value` lines.
    pub fn stats(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "background_dofs={}", self.u.len());
        let _ = writeln!(s, "fiber_dofs={}", self.w.len());
        let _ = writeln!(s, "iterations={}", self.iterations);
        let _ = writeln!(s, "initial_residual={:e}", self.residuals.first().copied().unwrap_or(0.0));
        let _ = writeln!(s, "final_residual={:e}", self.residuals.last().copied().unwrap_or(0.0));
        s
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub inner_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: OUTER_TOL,
            max_iter: DEFAULT_MAX_ITER,
            inner_tol: INNER_TOL,
        }
    }
}

/// Solves the reduced system for `u`, then recovers `w = L⁻¹Bu` and
/// `λ = L⁻¹Kw`.
pub fn solve_coupled(
    a: &SparseMatrix,
    k: &SparseMatrix,
    b: &SparseMatrix,
    l: &SparseMatrix,
    rhs: &[f64],
    opts: &SolveOptions,
) -> Result<CoupledSolution> {
    let mut op = ReducedOperator::new(a, k, b, l)?;
    op.inner_tol = opts.inner_tol;
    let precond = Jacobi::new(&op.jacobi_diagonal());
    let out = cg_solve(&op, &precond, rhs, None, opts.tol, opts.max_iter, "reduced system")?;
    let w = op.project(&out.x)?;
    let lambda = if w.is_empty() { Vec::new() } else { op.solve_mass(&k.mul_vec(&w))? };
    Ok(CoupledSolution {
        u: out.x,
        w,
        lambda,
        iterations: out.iterations,
        residuals: out.residuals,
    })
}

/// Dense direct solve of the full block system
///
/// ```text
/// | A   0   Bᵀ | |u|   |g|
/// | 0   K  −Lᵀ | |w| = |0|
/// | B  −L   0  | |λ|   |0|
/// ```
///
/// Intended for small reference instances only.
pub fn dense_block_solve(
    a: &SparseMatrix,
    k: &SparseMatrix,
    b: &SparseMatrix,
    l: &SparseMatrix,
    rhs: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let n = a.rows();
    let m = l.rows();
    let size = n + 2 * m;
    let mut full = DMatrix::<f64>::zeros(size, size);
    full.view_mut((0, 0), (n, n)).copy_from(&a.to_dense());
    let bd = b.to_dense();
    let ld = l.to_dense();
    full.view_mut((0, n + m), (n, m)).copy_from(&bd.transpose());
    full.view_mut((n, n), (m, m)).copy_from(&k.to_dense());
    full.view_mut((n, n + m), (m, m)).copy_from(&(-ld.transpose()));
    full.view_mut((n + m, 0), (m, n)).copy_from(&bd);
    full.view_mut((n + m, n), (m, m)).copy_from(&(-&ld));
    let mut g = DVector::zeros(size);
    g.rows_mut(0, n).copy_from_slice(rhs);
    let x = full
        .lu()
        .solve(&g)
        .ok_or_else(|| Error::param("block system", "singular"))?;
    Ok((
        x.rows(0, n).iter().copied().collect(),
        x.rows(n, m).iter().copied().collect(),
        x.rows(n + m, m).iter().copied().collect(),
    ))
}
