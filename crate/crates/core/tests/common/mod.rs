#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thinfiber::fem::{
    assemble_background_system, assemble_coupling, assemble_fiber_mass, assemble_fiber_stiffness, BoundaryConditions,
    DofMap, GeometricFactor, Lame, MaterialParams, Nitsche, SparseMatrix, COUPLING_QUAD_ORDER,
};
use thinfiber::mesh::{build_fiber_mesh, FiberCurve, FiberMesh, FiberNetwork, HexMesh, Point};

pub struct Coupled {
    pub mesh: HexMesh,
    pub fibers: FiberMesh,
    pub a: SparseMatrix,
    pub rhs: Vec<f64>,
    pub k: SparseMatrix,
    pub b: SparseMatrix,
    pub l: SparseMatrix,
}

pub fn stiff_fibers() -> MaterialParams {
    MaterialParams::new(Lame::new(0.4, 1.0), Lame::new(0.4, 1000.0)).unwrap()
}

pub fn pull_bcs() -> BoundaryConditions {
    BoundaryConditions::pull_test(Point::new(0.05, 0.0, 0.0), Nitsche::default())
}

pub fn assemble(level: u32, network: &FiberNetwork, refinements: u32, mat: &MaterialParams) -> Coupled {
    let mesh = HexMesh::new(level).unwrap();
    let bg = DofMap::background(&mesh);
    let fibers = build_fiber_mesh(network, refinements).unwrap();
    let fd = DofMap::fibers(&fibers);
    let (a, rhs) = assemble_background_system(&mesh, &bg, mat.matrix, &pull_bcs()).unwrap();
    let k = assemble_fiber_stiffness(&fibers, &fd, mat, GeometricFactor::Evaluate).unwrap();
    let b = assemble_coupling(&mesh, &bg, &fibers, &fd, COUPLING_QUAD_ORDER).unwrap();
    let l = assemble_fiber_mass(&fibers, &fd);
    Coupled {
        mesh,
        fibers,
        a,
        rhs,
        k,
        b,
        l,
    }
}

pub fn single_fiber(start: [f64; 3], end: [f64; 3], radius: f64) -> FiberNetwork {
    let c = FiberCurve::segment(Point::from(start), Point::from(end)).unwrap();
    FiberNetwork::new(vec![c], radius).unwrap()
}

/// Four straight fibers along x at the quarter points of the cross-section.
pub fn four_fibers(radius: f64) -> FiberNetwork {
    let mut curves = Vec::new();
    for (y, z) in [(0.3, 0.3), (0.7, 0.3), (0.3, 0.7), (0.7, 0.7)] {
        curves.push(FiberCurve::segment(Point::new(0.05, y, z), Point::new(0.95, y, z)).unwrap());
    }
    FiberNetwork::new(curves, radius).unwrap()
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}
