//! Reference models for the composite: rule of mixtures, Halpin-Tsai
//! estimates for chopped fibers, and elastic-constant conversions.

use crate::error::{Error, Result};
use crate::fem::{assemble_background_system, BoundaryConditions, DofMap, Lame, MaterialParams};
use crate::mesh::HexMesh;
use crate::solver::{cg_solve, CgOutcome, Jacobi, SolveOptions};

/// Lamé moduli of a homogenized comparison material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    pub lambda: f64,
    pub mu: f64,
}

impl EffectiveParams {
    pub fn lame(&self) -> Lame {
        Lame::new(self.lambda, self.mu)
    }
}

impl From<Lame> for EffectiveParams {
    fn from(l: Lame) -> Self {
        EffectiveParams {
            lambda: l.lambda,
            mu: l.mu,
        }
    }
}

/// `C_eff = C_Ω + β δC_f`.
pub fn rule_of_mixtures(mat: &MaterialParams, beta: f64) -> Result<EffectiveParams> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::param("beta", format!("{beta} outside [0, 1]")));
    }
    let d = mat.delta();
    Ok(EffectiveParams {
        lambda: mat.matrix.lambda + beta * d.lambda,
        mu: mat.matrix.mu + beta * d.mu,
    })
}

/// Plain elastic solve of the background with the given material.
pub fn solve_homogenized(
    mesh: &HexMesh,
    dofs: &DofMap,
    eff: &EffectiveParams,
    bcs: &BoundaryConditions,
    opts: &SolveOptions,
) -> Result<CgOutcome> {
    let (a, rhs) = assemble_background_system(mesh, dofs, eff.lame(), bcs)?;
    let precond = Jacobi::new(&a.diagonal());
    cg_solve(&a, &precond, &rhs, None, opts.tol, opts.max_iter, "homogenized system")
}

/// Halpin-Tsai estimates; moduli are ratios to the matrix modulus `E_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalpinTsaiResult {
    pub eta_l: f64,
    pub eta_t: f64,
    /// Longitudinal modulus of aligned short fibers, `E_L / E_m`.
    pub e_l: f64,
    /// Transverse modulus, `E_T / E_m`.
    pub e_t: f64,
    /// Planar-random composite modulus, `E_C / E_m`.
    pub e_c: f64,
    /// Planar-random shear modulus, `μ_C / E_m`.
    pub mu_c: f64,
    pub nu_r: f64,
}

impl HalpinTsaiResult {
    /// Isotropic Lamé pair of the planar-random estimate in absolute units.
    pub fn isotropic_lame(&self, e_m: f64) -> Result<Lame> {
        lame_from_young_poisson(self.e_c * e_m, self.nu_r)
    }
}

/// Halpin-Tsai chain for chopped fibers. `aspect` is the `2l/d` shape factor.
pub fn halpin_tsai(e_f: f64, e_m: f64, aspect: f64, beta: f64) -> Result<HalpinTsaiResult> {
    if !(e_f > 0.0) || !(e_m > 0.0) {
        return Err(Error::param("young", format!("E_f = {e_f}, E_m = {e_m} must be positive")));
    }
    if !(aspect > 0.0) {
        return Err(Error::param("aspect", format!("{aspect} must be positive")));
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::param("beta", format!("{beta} outside [0, 1)")));
    }
    let ratio = e_f / e_m;
    let eta_l = (ratio - 1.0) / (ratio + aspect);
    let eta_t = (ratio - 1.0) / (ratio + 2.0);
    let den_l = 1.0 - eta_l * beta;
    let den_t = 1.0 - eta_t * beta;
    if den_l <= 0.0 || den_t <= 0.0 {
        return Err(Error::param("beta", format!("1 − ηβ vanishes (ηL β = {}, ηT β = {})", eta_l * beta, eta_t * beta)));
    }
    let e_l = (1.0 + aspect * eta_l * beta) / den_l;
    let e_t = (1.0 + 2.0 * eta_t * beta) / den_t;
    let e_c = 3.0 / 8.0 * e_l + 5.0 / 8.0 * e_t;
    let mu_c = 1.0 / 8.0 * e_l + 1.0 / 4.0 * e_t;
    Ok(HalpinTsaiResult {
        eta_l,
        eta_t,
        e_l,
        e_t,
        e_c,
        mu_c,
        nu_r: e_c / (2.0 * mu_c) - 1.0,
    })
}

pub fn lame_from_young_poisson(e: f64, nu: f64) -> Result<Lame> {
    if !(e > 0.0) {
        return Err(Error::param("young", format!("{e} must be positive")));
    }
    if nu == 0.5 {
        return Err(Error::param("poisson", "ν = 0.5 is incompressible"));
    }
    if !(nu > -1.0 && nu < 0.5) {
        return Err(Error::param("poisson", format!("{nu} outside (−1, 0.5)")));
    }
    Ok(Lame::new(e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)), e / (2.0 * (1.0 + nu))))
}

/// Inverse of [`lame_from_young_poisson`]: `(E, ν)`.
pub fn young_poisson_from_lame(lame: Lame) -> (f64, f64) {
    let (l, m) = (lame.lambda, lame.mu);
    (m * (3.0 * l + 2.0 * m) / (l + m), l / (2.0 * (l + m)))
}
