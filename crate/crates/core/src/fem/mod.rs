//! Finite element spaces and the four operators of the coupled system:
//! background stiffness `A`, fiber stiffness `K`, coupling `B` and fiber
//! mass `L`, plus boundary terms.

mod assembly;
mod boundary;
mod sparse;

pub use assembly::{
    assemble_background_stiffness, assemble_coupling, assemble_fiber_mass, assemble_fiber_stiffness,
    hex_element_stiffness, GeometricFactor, COUPLING_QUAD_ORDER,
};
pub use boundary::{
    apply_nitsche_dirichlet, assemble_background_system, assemble_neumann_load, BoundaryConditions, Nitsche,
    DEFAULT_NITSCHE_GAMMA,
};
pub use sparse::{SparseMatrix, TripletBuilder};

use crate::error::{Error, Result};
use crate::mesh::{trilinear_values, FiberMesh, HexMesh, Point};

/// Spatial dimension of displacement fields.
pub const DIM: usize = 3;

/// Isotropic Lamé pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lame {
    pub lambda: f64,
    pub mu: f64,
}

impl Lame {
    pub fn new(lambda: f64, mu: f64) -> Self {
        Lame { lambda, mu }
    }

    /// Constrained (P-wave) modulus `2μ + λ`.
    pub fn p_modulus(&self) -> f64 {
        2.0 * self.mu + self.lambda
    }

    pub fn scale(&self, factor: f64) -> Lame {
        Lame::new(self.lambda * factor, self.mu * factor)
    }

    pub(crate) fn check_elliptic(&self, name: &'static str) -> Result<()> {
        if !(self.mu > 0.0) || !(2.0 * self.mu + 3.0 * self.lambda > 0.0) {
            return Err(Error::param(
                name,
                format!("μ = {}, λ = {} is not strongly elliptic", self.mu, self.lambda),
            ));
        }
        Ok(())
    }
}

/// Lamé moduli of the elastic matrix and of the fibers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub matrix: Lame,
    pub fiber: Lame,
}

impl MaterialParams {
    pub fn new(matrix: Lame, fiber: Lame) -> Result<Self> {
        let p = MaterialParams { matrix, fiber };
        p.validate()?;
        Ok(p)
    }

    /// Fibers at least as stiff as the matrix; equality gives a vanishing
    /// excess tensor and decouples the fiber problem.
    pub fn validate(&self) -> Result<()> {
        self.matrix.check_elliptic("matrix")?;
        if self.fiber.mu < self.matrix.mu || self.fiber.lambda < self.matrix.lambda {
            return Err(Error::param(
                "fiber",
                format!(
                    "fiber moduli (λ={}, μ={}) must not be below the matrix moduli (λ={}, μ={})",
                    self.fiber.lambda, self.fiber.mu, self.matrix.lambda, self.matrix.mu
                ),
            ));
        }
        Ok(())
    }

    /// Excess tensor `C_f − C_Ω`.
    pub fn delta(&self) -> Lame {
        Lame::new(self.fiber.lambda - self.matrix.lambda, self.fiber.mu - self.matrix.mu)
    }
}

/// Vector-valued degree-of-freedom numbering: node `n`, component `c` maps to
/// `DIM * n + c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofMap {
    n_nodes: usize,
}

impl DofMap {
    pub fn background(mesh: &HexMesh) -> Self {
        DofMap {
            n_nodes: mesh.n_vertices(),
        }
    }

    pub fn fibers(mesh: &FiberMesh) -> Self {
        DofMap {
            n_nodes: mesh.n_nodes(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_dofs(&self) -> usize {
        DIM * self.n_nodes
    }

    #[inline]
    pub fn dof(&self, node: usize, comp: usize) -> usize {
        DIM * node + comp
    }

    pub fn cell_dofs(&self, mesh: &HexMesh, cell: usize) -> [usize; 24] {
        let verts = mesh.cell_vertices(cell);
        std::array::from_fn(|k| self.dof(verts[k / DIM], k % DIM))
    }

    /// Nodal vector interpolating `f`.
    pub fn interpolate(&self, nodes: impl Iterator<Item = Point>, f: impl Fn(&Point) -> Point) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_dofs());
        for p in nodes {
            out.extend(f(&p).iter());
        }
        assert_eq!(out.len(), self.n_dofs());
        out
    }
}

/// Evaluates a trilinear background field at a point of the cube.
pub fn evaluate_field(mesh: &HexMesh, field: &[f64], x: &Point) -> Result<Point> {
    let expected = DIM * mesh.n_vertices();
    if field.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: field.len(),
        });
    }
    let loc = mesh.locate(x)?;
    let vals = trilinear_values(&loc.local);
    let verts = mesh.cell_vertices(loc.cell);
    let mut out = Point::zeros();
    for (v, n) in verts.iter().zip(vals) {
        for c in 0..DIM {
            out[c] += n * field[DIM * v + c];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn material_ordering() {
        let m = Lame::new(0.4, 1.0);
        assert!(MaterialParams::new(m, Lame::new(0.4, 1000.0)).is_ok());
        assert!(MaterialParams::new(m, m).is_ok());
        assert!(MaterialParams::new(m, Lame::new(0.4, 0.5)).is_err());
        assert!(MaterialParams::new(Lame::new(0.4, 0.0), Lame::new(0.4, 1.0)).is_err());
        assert!(MaterialParams::new(Lame::new(-1.0, 1.0), Lame::new(0.4, 2.0)).is_err());
        let d = MaterialParams::new(m, Lame::new(0.9, 3.0)).unwrap().delta();
        assert!((d.lambda - 0.5).abs() < 1e-15 && (d.mu - 2.0).abs() < 1e-15);
    }

    #[test]
    fn dofs_are_dense_and_interleaved() {
        let mesh = HexMesh::new(1).unwrap();
        let dofs = DofMap::background(&mesh);
        assert_eq!(dofs.n_dofs(), 81);
        let mut seen = vec![false; dofs.n_dofs()];
        for c in 0..mesh.n_cells() {
            for d in dofs.cell_dofs(&mesh, c) {
                seen[d] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(dofs.dof(4, 2), 14);
    }

    #[test]
    fn evaluates_affine_fields_exactly() {
        let mesh = HexMesh::new(2).unwrap();
        let dofs = DofMap::background(&mesh);
        let f = |p: &Point| Point::new(p[0] + 2.0 * p[1], -p[2], 3.0);
        let u = dofs.interpolate(mesh.vertices(), f);
        let x = Point::new(0.33, 0.71, 0.05);
        assert!((evaluate_field(&mesh, &u, &x).unwrap() - f(&x)).norm() < 1e-14);
        assert!(evaluate_field(&mesh, &u[1..], &x).is_err());
    }
}
