use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, TestKind};
use super::metrics::l2_error;
use crate::error::{Error, Result};
use crate::fem::{
    assemble_background_system, assemble_coupling, assemble_fiber_mass, assemble_fiber_stiffness, BoundaryConditions,
    DofMap, GeometricFactor, Lame, Nitsche, COUPLING_QUAD_ORDER,
};
use crate::fibergen::{random_planar_fibers, uniform_parallel_fibers};
use crate::homogenize::{
    halpin_tsai, rule_of_mixtures, solve_homogenized, young_poisson_from_lame, EffectiveParams,
};
use crate::mesh::{build_fiber_mesh, FiberMesh, FiberNetwork, HexMesh, Point};
use crate::solver::{solve_coupled, CoupledSolution};

/// One row of a sweep. A failed point keeps its count and the error message.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub n_fibers: usize,
    pub radius: f64,
    pub l2_error: f64,
    pub iterations: usize,
    pub seconds: f64,
    pub error: Option<String>,
}

/// Everything produced by one coupled solve and its reference.
#[derive(Debug, Clone)]
pub struct PointSolution {
    pub mesh: HexMesh,
    pub fibers: FiberMesh,
    pub coupled: CoupledSolution,
    pub u_hom: Vec<f64>,
    pub l2_error: f64,
}

/// Homogenized comparison material of a test.
pub fn reference_material(cfg: &ExperimentConfig) -> Result<EffectiveParams> {
    match cfg.test {
        TestKind::Pull | TestKind::Push => rule_of_mixtures(&cfg.material, cfg.beta),
        TestKind::RandomPlanar => {
            let (e_m, _) = young_poisson_from_lame(cfg.material.matrix);
            let (e_f, _) = young_poisson_from_lame(cfg.material.fiber);
            // Halpin-Tsai shape factor 2l/d
            let ht = halpin_tsai(e_f, e_m, 2.0 * cfg.aspect, cfg.beta)?;
            Ok(ht.isotropic_lame(e_m)?.into())
        }
    }
}

/// Face 0 clamped, axial traction on face 1. Push flips the sign.
pub fn boundary_conditions(cfg: &ExperimentConfig, reference: Lame) -> BoundaryConditions {
    let sign = if cfg.test == TestKind::Push { -1.0 } else { 1.0 };
    let modulus = cfg.penalty_modulus.unwrap_or_else(|| reference.p_modulus());
    let nitsche = Nitsche::new(cfg.gamma).with_penalty_modulus(modulus);
    BoundaryConditions::pull_test(Point::new(sign * cfg.traction, 0.0, 0.0), nitsche)
}

/// Fiber network of one sweep point; `n_f = 0` gives an empty network.
pub fn generate_network(cfg: &ExperimentConfig, n_f: usize) -> Result<FiberNetwork> {
    if n_f == 0 {
        return Ok(FiberNetwork::empty(1.0));
    }
    match cfg.test {
        TestKind::Pull | TestKind::Push => {
            let side = (n_f as f64).sqrt().round() as usize;
            if side * side != n_f {
                return Err(Error::param("fibers", format!("{n_f} is not a perfect square")));
            }
            uniform_parallel_fibers(side, cfg.beta, 0, cfg.margin)
        }
        TestKind::RandomPlanar => {
            let (length, radius) = cfg.random_fiber_size(n_f);
            Ok(random_planar_fibers(n_f, length, radius, cfg.seed)?.network)
        }
    }
}

/// Coupled solve on a given network plus its homogenized reference.
pub fn solve_network(cfg: &ExperimentConfig, network: &FiberNetwork) -> Result<PointSolution> {
    cfg.validate()?;
    let mesh = HexMesh::new(cfg.r_omega)?;
    let bg = DofMap::background(&mesh);
    let reference = reference_material(cfg)?;
    let bcs = boundary_conditions(cfg, reference.lame());
    let opts = cfg.solve_options();

    let fibers = build_fiber_mesh(network, cfg.r_gamma)?;
    let fd = DofMap::fibers(&fibers);
    let (a, rhs) = assemble_background_system(&mesh, &bg, cfg.material.matrix, &bcs)?;
    let k = assemble_fiber_stiffness(&fibers, &fd, &cfg.material, GeometricFactor::Evaluate)?;
    let b = assemble_coupling(&mesh, &bg, &fibers, &fd, COUPLING_QUAD_ORDER)?;
    let l = assemble_fiber_mass(&fibers, &fd);
    let coupled = solve_coupled(&a, &k, &b, &l, &rhs, &opts)?;

    let u_hom = solve_homogenized(&mesh, &bg, &reference, &bcs, &opts)?.x;
    let err = l2_error(&coupled.u, &u_hom, &mesh, &bg)?;
    Ok(PointSolution {
        mesh,
        fibers,
        coupled,
        u_hom,
        l2_error: err,
    })
}

/// Generates the fibers of one sweep point and solves.
pub fn solve_one(cfg: &ExperimentConfig, n_f: usize) -> Result<(FiberNetwork, PointSolution)> {
    let network = generate_network(cfg, n_f)?;
    let sol = solve_network(cfg, &network)?;
    Ok((network, sol))
}

/// Runs every sweep point, in parallel, keeping the configured order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    Ok(cfg.fibers.par_iter().map(|&n_f| run_point(cfg, n_f)).collect())
}

fn run_point(cfg: &ExperimentConfig, n_f: usize) -> SweepRecord {
    let start = Instant::now();
    match solve_one(cfg, n_f) {
        Ok((network, sol)) => SweepRecord {
            n_fibers: n_f,
            radius: if n_f == 0 { 0.0 } else { network.radius() },
            l2_error: sol.l2_error,
            iterations: sol.coupled.iterations,
            seconds: start.elapsed().as_secs_f64(),
            error: None,
        },
        Err(e) => SweepRecord {
            n_fibers: n_f,
            radius: f64::NAN,
            l2_error: f64::NAN,
            iterations: 0,
            seconds: start.elapsed().as_secs_f64(),
            error: Some(format!("{}: {e}", e.kind())),
        },
    }
}
