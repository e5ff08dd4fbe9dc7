mod common;

use common::{max_abs, max_diff};
use thinfiber::fem::{assemble_background_system, DofMap};
use thinfiber::harness::{
    boundary_conditions, csv_string, parse_csv, parse_vtk, reference_material, run_experiment, solve_one, vtk_string,
    ExperimentConfig, TestKind,
};
use thinfiber::homogenize::{rule_of_mixtures, solve_homogenized};
use thinfiber::mesh::HexMesh;
use thinfiber::solver::{cg_solve, Jacobi};

fn small_pull() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::for_test(TestKind::Pull);
    cfg.r_omega = 2;
    cfg.r_gamma = 2;
    cfg.fibers = vec![4, 16];
    cfg
}

#[test]
fn no_fibers_equals_matrix_only_solves() {
    let mut cfg = small_pull();
    cfg.fibers = vec![0];
    let (_, sol) = solve_one(&cfg, 0).unwrap();

    let mesh = HexMesh::new(cfg.r_omega).unwrap();
    let dofs = DofMap::background(&mesh);
    let bcs = boundary_conditions(&cfg, reference_material(&cfg).unwrap().lame());
    let bare = rule_of_mixtures(&cfg.material, 0.0).unwrap();
    let hom = solve_homogenized(&mesh, &dofs, &bare, &bcs, &cfg.solve_options()).unwrap();
    let (a, rhs) = assemble_background_system(&mesh, &dofs, cfg.material.matrix, &bcs).unwrap();
    let plain = cg_solve(&a, &Jacobi::new(&a.diagonal()), &rhs, None, 1e-12, 20_000, "plain").unwrap();

    let scale = max_abs(&plain.x);
    assert!(max_diff(&sol.coupled.u, &plain.x) <= 1e-8 * scale);
    assert!(max_diff(&hom.x, &plain.x) <= 1e-8 * scale);
    assert!(sol.coupled.w.is_empty());
}

#[test]
fn matching_moduli_reproduce_reference() {
    let mut cfg = small_pull();
    cfg.material.fiber = cfg.material.matrix;
    let recs = run_experiment(&cfg).unwrap();
    for r in recs {
        assert!(r.error.is_none());
        assert!(r.l2_error <= 1e-9, "n_f = {}: {}", r.n_fibers, r.l2_error);
    }
}

#[test]
fn failed_point_is_recorded_and_sweep_continues() {
    let mut cfg = ExperimentConfig::for_test(TestKind::Pull);
    cfg.fibers = vec![0, 16, 400];
    cfg.max_iter = 60;
    let recs = run_experiment(&cfg).unwrap();
    assert_eq!(recs.iter().map(|r| r.n_fibers).collect::<Vec<_>>(), [0, 16, 400]);
    assert!(recs[0].error.is_none() && recs[0].l2_error.is_finite());
    for r in &recs[1..] {
        assert!(r.error.as_deref().unwrap().starts_with("non_convergence"));
        assert!(r.l2_error.is_nan());
    }
}

#[test]
fn push_mirrors_pull() {
    let cfg = small_pull();
    let mut push = cfg.clone();
    push.test = TestKind::Push;
    let (_, a) = solve_one(&cfg, 4).unwrap();
    let (_, b) = solve_one(&push, 4).unwrap();
    assert!((a.l2_error - b.l2_error).abs() <= 1e-9 * a.l2_error);
    let neg: Vec<f64> = b.coupled.u.iter().map(|v| -v).collect();
    assert!(max_diff(&a.coupled.u, &neg) <= 1e-9 * max_abs(&neg));
}

#[test]
fn sweep_is_deterministic() {
    let strip = |s: String| -> Vec<String> {
        s.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect()
    };
    let mut cfg = ExperimentConfig::for_test(TestKind::RandomPlanar);
    cfg.r_omega = 2;
    cfg.fibers = vec![20, 40];
    let a = csv_string(&run_experiment(&cfg).unwrap());
    let b = csv_string(&run_experiment(&cfg).unwrap());
    assert_eq!(strip(a.clone()), strip(b));
    assert_eq!(parse_csv(&a).unwrap().len(), 2);
    cfg.seed += 1;
    let c = csv_string(&run_experiment(&cfg).unwrap());
    assert_ne!(strip(a), strip(c));
}

#[test]
fn solved_field_exports_to_vtk() {
    let mut cfg = small_pull();
    cfg.r_omega = 1;
    let (_, sol) = solve_one(&cfg, 4).unwrap();
    let text = vtk_string(&sol.mesh, &sol.fibers, &sol.coupled.u, &sol.u_hom, &sol.coupled.w).unwrap();
    let grid = parse_vtk(&text).unwrap();
    assert_eq!(grid.points.len(), 27 + sol.fibers.n_nodes());
    assert_eq!(grid.cells.len(), 8 + 4);
    let u = &grid.vectors["u"];
    for v in 0..27 {
        for c in 0..3 {
            assert_eq!(u[v][c], sol.coupled.u[3 * v + c]);
        }
    }
}
