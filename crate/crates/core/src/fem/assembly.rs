use nalgebra::{Matrix3, SMatrix};

use super::{DofMap, Lame, MaterialParams, SparseMatrix, TripletBuilder, DIM};
use crate::error::Result;
use crate::geometry::{geometric_factor_g, TubeValidity};
use crate::mesh::{trilinear_gradients, trilinear_values, FiberMesh, HexMesh, Point};
use crate::quadrature::GaussRule;

/// Default Gauss points per fiber element for the coupling matrix. Fiber
/// elements may straddle background cells, so the integrand is only piecewise
/// polynomial and this rule is not exact.
pub const COUPLING_QUAD_ORDER: usize = 4;

pub type ElementMatrix = SMatrix<f64, 24, 24>;

/// Element stiffness `(C ∇v_i, ∇v_j)` of a cube cell of edge `h`, 2×2×2 Gauss.
///
/// Row/column `3a + i` is local vertex `a`, component `i`.
pub fn hex_element_stiffness(h: f64, lame: Lame) -> ElementMatrix {
    let rule = GaussRule::new(2);
    let mut ke = ElementMatrix::zeros();
    for (x, wx) in rule.iter() {
        for (y, wy) in rule.iter() {
            for (z, wz) in rule.iter() {
                let w = wx * wy * wz * h * h * h;
                let grads = trilinear_gradients(&Point::new(x, y, z)).map(|g| g / h);
                for a in 0..8 {
                    for b in 0..8 {
                        let ga = &grads[a];
                        let gb = &grads[b];
                        let dot = ga.dot(gb);
                        for i in 0..DIM {
                            for j in 0..DIM {
                                let mut v = lame.mu * ga[j] * gb[i] + lame.lambda * ga[i] * gb[j];
                                if i == j {
                                    v += lame.mu * dot;
                                }
                                ke[(DIM * a + i, DIM * b + j)] += w * v;
                            }
                        }
                    }
                }
            }
        }
    }
    ke
}

/// `A_ij = (C_Ω ∇v_i, ∇v_j)_Ω` over the whole cube.
pub fn assemble_background_stiffness(mesh: &HexMesh, dofs: &DofMap, lame: Lame) -> SparseMatrix {
    // uniform mesh: every cell shares one element matrix
    let ke = hex_element_stiffness(mesh.h(), lame);
    let n = dofs.n_dofs();
    let mut b = TripletBuilder::with_capacity(n, n, mesh.n_cells() * 576);
    for cell in 0..mesh.n_cells() {
        let cd = dofs.cell_dofs(mesh, cell);
        for (r, &gr) in cd.iter().enumerate() {
            for (c, &gc) in cd.iter().enumerate() {
                b.push(gr, gc, ke[(r, c)]);
            }
        }
    }
    b.build()
}

/// How the curvature correction enters the fiber stiffness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GeometricFactor {
    /// Evaluate `g` at each element from its curvature.
    #[default]
    Evaluate,
    /// Straight-cylinder approximation `g ≡ 1`.
    Unit,
}

/// `K_ab = πa² (g δC_f ∇_Γ w_a, ∇_Γ w_b)_Γ`.
///
/// With `∇_Γ w = ∂_s w ⊗ t` the integrand reduces to
/// `μ_δ |∂_s w|² + (μ_δ + λ_δ) (t · ∂_s w)²`.
pub fn assemble_fiber_stiffness(
    fibers: &FiberMesh,
    dofs: &DofMap,
    mat: &MaterialParams,
    factor: GeometricFactor,
) -> Result<SparseMatrix> {
    let delta = mat.delta();
    let area = std::f64::consts::PI * fibers.radius * fibers.radius;
    let n = dofs.n_dofs();
    let mut b = TripletBuilder::with_capacity(n, n, fibers.n_elements() * 36);
    let rule = GaussRule::new(2);
    for el in &fibers.elements {
        TubeValidity::new(el.curvature, fibers.radius).check()?;
        let g = match factor {
            GeometricFactor::Evaluate => geometric_factor_g(el.curvature, fibers.radius, 0.0)?,
            GeometricFactor::Unit => 1.0,
        };
        let t = el.tangent;
        let d: Matrix3<f64> = Matrix3::identity() * delta.mu + t * t.transpose() * (delta.mu + delta.lambda);
        // shape derivatives ±1/ℓ are constant; the rule still integrates them
        let dn = [-1.0 / el.length, 1.0 / el.length];
        let mut stiff = [[0.0; 2]; 2];
        for (_, w) in rule.iter() {
            for p in 0..2 {
                for q in 0..2 {
                    stiff[p][q] += w * el.length * dn[p] * dn[q];
                }
            }
        }
        for p in 0..2 {
            for q in 0..2 {
                for i in 0..DIM {
                    for j in 0..DIM {
                        let v = area * g * stiff[p][q] * d[(i, j)];
                        if v != 0.0 {
                            b.push(dofs.dof(el.nodes[p], i), dofs.dof(el.nodes[q], j), v);
                        }
                    }
                }
            }
        }
    }
    Ok(b.build())
}

/// `L_ab = (w_a, w_b)_Γ`, 2-point Gauss per element.
pub fn assemble_fiber_mass(fibers: &FiberMesh, dofs: &DofMap) -> SparseMatrix {
    let n = dofs.n_dofs();
    let mut b = TripletBuilder::with_capacity(n, n, fibers.n_elements() * 12);
    let rule = GaussRule::new(2);
    for el in &fibers.elements {
        let mut m = [[0.0; 2]; 2];
        for (x, w) in rule.iter() {
            let nv = [1.0 - x, x];
            for p in 0..2 {
                for q in 0..2 {
                    m[p][q] += w * el.length * nv[p] * nv[q];
                }
            }
        }
        for p in 0..2 {
            for q in 0..2 {
                for c in 0..DIM {
                    b.push(dofs.dof(el.nodes[p], c), dofs.dof(el.nodes[q], c), m[p][q]);
                }
            }
        }
    }
    b.build()
}

/// `B_ai = (v_i ∘ X, w_a)_Γ`: rows are fiber dofs, columns background dofs.
pub fn assemble_coupling(
    mesh: &HexMesh,
    bg_dofs: &DofMap,
    fibers: &FiberMesh,
    fiber_dofs: &DofMap,
    quad_order: usize,
) -> Result<SparseMatrix> {
    let rule = GaussRule::new(quad_order.max(1));
    let mut b = TripletBuilder::with_capacity(
        fiber_dofs.n_dofs(),
        bg_dofs.n_dofs(),
        fibers.n_elements() * rule.len() * 2 * 8 * DIM,
    );
    for el in &fibers.elements {
        let p0 = fibers.nodes[el.nodes[0]];
        let p1 = fibers.nodes[el.nodes[1]];
        for (x, w) in rule.iter() {
            let pt = p0 + (p1 - p0) * x;
            let loc = mesh.locate(&pt)?;
            let vals = trilinear_values(&loc.local);
            let verts = mesh.cell_vertices(loc.cell);
            let nf = [1.0 - x, x];
            for (p, &np) in nf.iter().enumerate() {
                for (v, &nv) in verts.iter().zip(vals.iter()) {
                    let val = w * el.length * np * nv;
                    if val == 0.0 {
                        continue;
                    }
                    for c in 0..DIM {
                        b.push(fiber_dofs.dof(el.nodes[p], c), bg_dofs.dof(*v, c), val);
                    }
                }
            }
        }
    }
    Ok(b.build())
}
