use super::{DofMap, Lame, SparseMatrix, TripletBuilder, DIM};
use crate::error::{Error, Result};
use crate::mesh::{face_axis, face_normal, trilinear_gradients, trilinear_values, HexMesh, Point};
use crate::quadrature::GaussRule;

pub const DEFAULT_NITSCHE_GAMMA: f64 = 10.0;

/// Symmetric Nitsche parameters. The penalty on a facet of size `h` is
/// `gamma · modulus / h`, where `modulus` defaults to `2μ + λ` of the
/// operator's own material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nitsche {
    pub gamma: f64,
    pub penalty_modulus: Option<f64>,
}

impl Default for Nitsche {
    fn default() -> Self {
        Nitsche {
            gamma: DEFAULT_NITSCHE_GAMMA,
            penalty_modulus: None,
        }
    }
}

impl Nitsche {
    pub fn new(gamma: f64) -> Self {
        Nitsche {
            gamma,
            penalty_modulus: None,
        }
    }

    pub fn with_penalty_modulus(mut self, modulus: f64) -> Self {
        self.penalty_modulus = Some(modulus);
        self
    }

    fn penalty(&self, lame: &Lame, h: f64) -> Result<f64> {
        if !(self.gamma > 0.0) {
            return Err(Error::param("gamma", format!("{} must be positive", self.gamma)));
        }
        let modulus = self.penalty_modulus.unwrap_or_else(|| lame.p_modulus());
        if !(modulus > 0.0) {
            return Err(Error::param("penalty_modulus", format!("{modulus} must be positive")));
        }
        Ok(self.gamma * modulus / h)
    }
}

/// Quadrature points on one cell face: reference coordinates and physical weights.
fn facet_points(mesh: &HexMesh, label: u8, order: usize) -> Vec<(Point, f64)> {
    let (axis, upper) = face_axis(label).expect("label validated by caller");
    let rule = GaussRule::new(order);
    let others: Vec<usize> = (0..3).filter(|&d| d != axis).collect();
    let h2 = mesh.h() * mesh.h();
    let mut out = Vec::with_capacity(order * order);
    for (s, ws) in rule.iter() {
        for (t, wt) in rule.iter() {
            let mut xi = Point::zeros();
            xi[axis] = if upper { 1.0 } else { 0.0 };
            xi[others[0]] = s;
            xi[others[1]] = t;
            out.push((xi, ws * wt * h2));
        }
    }
    out
}

/// Traction `σ(N e_j) n` of the vector shape function `N e_j`.
#[inline]
fn shape_traction(lame: &Lame, grad: &Point, j: usize, n: &Point) -> Point {
    let gn = grad.dot(n);
    let mut t = *n * (lame.lambda * grad[j]) + *grad * (lame.mu * n[j]);
    t[j] += lame.mu * gn;
    t
}

/// Weakly imposes `u = value` on the labelled face by symmetric Nitsche.
///
/// Returns `A + N` and adds the matching terms to `rhs`. `lame` must be the
/// material of `a`, since the consistency terms use its traction.
#[allow(clippy::too_many_arguments)]
pub fn apply_nitsche_dirichlet(
    a: &SparseMatrix,
    rhs: &mut [f64],
    mesh: &HexMesh,
    dofs: &DofMap,
    lame: Lame,
    face_label: u8,
    value: impl Fn(&Point) -> Point,
    nitsche: &Nitsche,
) -> Result<SparseMatrix> {
    let h = mesh.h();
    let penalty = nitsche.penalty(&lame, h)?;
    let facets = mesh.boundary_facets(face_label)?;
    if rhs.len() != dofs.n_dofs() {
        return Err(Error::DimensionMismatch {
            expected: dofs.n_dofs(),
            actual: rhs.len(),
        });
    }
    let normal = face_normal(face_label).unwrap();
    let points = facet_points(mesh, face_label, 2);
    let mut b = TripletBuilder::with_capacity(a.rows(), a.cols(), facets.len() * 576);
    for facet in &facets {
        let cd = dofs.cell_dofs(mesh, facet.cell);
        let origin = mesh.cell_origin(facet.cell);
        for (xi, w) in &points {
            let vals = trilinear_values(xi);
            let grads = trilinear_gradients(xi).map(|g| g / h);
            let x = origin + xi * h;
            let g = value(&x);
            // tractions[a][i] = σ(N_a e_i) n
            let tractions: [[Point; DIM]; 8] =
                std::array::from_fn(|v| std::array::from_fn(|i| shape_traction(&lame, &grads[v], i, &normal)));
            for va in 0..8 {
                for i in 0..DIM {
                    let row = DIM * va + i;
                    let tv = &tractions[va][i];
                    rhs[cd[row]] += w * (penalty * g[i] * vals[va] - tv.dot(&g));
                    for vb in 0..8 {
                        for j in 0..DIM {
                            let col = DIM * vb + j;
                            let tu = &tractions[vb][j];
                            let mut v = -tu[i] * vals[va] - tv[j] * vals[vb];
                            if i == j {
                                v += penalty * vals[va] * vals[vb];
                            }
                            b.push(cd[row], cd[col], w * v);
                        }
                    }
                }
            }
        }
    }
    Ok(a.add(&b.build()))
}

/// Nodal loads of a constant traction on a labelled face.
pub fn assemble_neumann_load(mesh: &HexMesh, dofs: &DofMap, face_label: u8, traction: Point) -> Result<Vec<f64>> {
    let facets = mesh.boundary_facets(face_label)?;
    let mut rhs = vec![0.0; dofs.n_dofs()];
    if traction == Point::zeros() {
        return Ok(rhs);
    }
    let points = facet_points(mesh, face_label, 2);
    for facet in &facets {
        let cd = dofs.cell_dofs(mesh, facet.cell);
        for (xi, w) in &points {
            let vals = trilinear_values(xi);
            for (va, nv) in vals.iter().enumerate() {
                for i in 0..DIM {
                    rhs[cd[DIM * va + i]] += w * nv * traction[i];
                }
            }
        }
    }
    Ok(rhs)
}

/// Constant Dirichlet and Neumann data per labelled face.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryConditions {
    pub dirichlet: Vec<(u8, Point)>,
    pub neumann: Vec<(u8, Point)>,
    pub nitsche: Nitsche,
}

impl BoundaryConditions {
    /// Face 0 clamped, traction on face 1, remaining faces traction-free.
    pub fn pull_test(traction: Point, nitsche: Nitsche) -> Self {
        BoundaryConditions {
            dirichlet: vec![(0, Point::zeros())],
            neumann: vec![(1, traction)],
            nitsche,
        }
    }
}

/// Background stiffness with boundary terms, and the load vector.
pub fn assemble_background_system(
    mesh: &HexMesh,
    dofs: &DofMap,
    lame: Lame,
    bcs: &BoundaryConditions,
) -> Result<(SparseMatrix, Vec<f64>)> {
    let mut a = super::assemble_background_stiffness(mesh, dofs, lame);
    let mut rhs = vec![0.0; dofs.n_dofs()];
    for &(label, traction) in &bcs.neumann {
        let f = assemble_neumann_load(mesh, dofs, label, traction)?;
        rhs.iter_mut().zip(&f).for_each(|(r, v)| *r += v);
    }
    for &(label, value) in &bcs.dirichlet {
        a = apply_nitsche_dirichlet(&a, &mut rhs, mesh, dofs, lame, label, |_| value, &bcs.nitsche)?;
    }
    Ok((a, rhs))
}
