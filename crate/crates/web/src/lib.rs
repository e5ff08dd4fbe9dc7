//! WebAssembly bindings for the static demo page in `www/`.
//!
//! The plain functions return `Result<_, String>` so they can be tested
//! natively; the `#[wasm_bindgen]` wrappers only convert errors.

use thinfiber::fem::{
    assemble_background_system, assemble_coupling, assemble_fiber_mass, assemble_fiber_stiffness, evaluate_field,
    BoundaryConditions, DofMap, GeometricFactor, Lame, MaterialParams, Nitsche, COUPLING_QUAD_ORDER,
};
use thinfiber::fibergen::uniform_parallel_fibers;
use thinfiber::geometry::geometric_factor_g;
use thinfiber::harness::l2_error;
use thinfiber::homogenize::{halpin_tsai, lame_from_young_poisson, rule_of_mixtures, solve_homogenized};
use thinfiber::mesh::{build_fiber_mesh, HexMesh, Point};
use thinfiber::solver::{solve_coupled, SolveOptions};
use wasm_bindgen::prelude::*;

/// Largest background level the page may request; level 3 already solves in well under a second.
pub const MAX_DEMO_LEVEL: u32 = 3;

/// `[η_L, η_T, E_L, E_T, E_C, μ_C, ν_R, λ_eff, μ_eff]`, moduli in the units of `e_m`.
pub fn halpin_tsai_values(e_f: f64, e_m: f64, aspect: f64, beta: f64) -> Result<Vec<f64>, String> {
    let r = halpin_tsai(e_f, e_m, aspect, beta).map_err(|e| e.to_string())?;
    let lame = r.isotropic_lame(e_m).map_err(|e| e.to_string())?;
    Ok(vec![
        r.eta_l,
        r.eta_t,
        r.e_l * e_m,
        r.e_t * e_m,
        r.e_c * e_m,
        r.mu_c * e_m,
        r.nu_r,
        lame.lambda,
        lame.mu,
    ])
}

/// `g` against `κa` on `samples` points of `[0, max_ka]`, interleaved as
/// `[κa, g(θ̂ = 0), g(θ̂ = π)]` per sample, for a tube of radius `a`.
pub fn geometric_factor_curve(a: f64, max_ka: f64, samples: usize) -> Result<Vec<f64>, String> {
    if !(max_ka > 0.0 && max_ka < 1.0) {
        return Err(format!("max κa = {max_ka} must lie in (0, 1)"));
    }
    if samples < 2 {
        return Err("need at least two samples".into());
    }
    let mut out = Vec::with_capacity(3 * samples);
    for i in 0..samples {
        let ka = max_ka * i as f64 / (samples - 1) as f64;
        let k = ka / a;
        out.push(ka);
        for theta in [0.0, std::f64::consts::PI] {
            out.push(geometric_factor_g(k, a, theta).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

/// Pull test with an `n_per_side²` fiber array. Returns
/// `[l2_error, iterations, samples, u_x coupled…, u_x homogenized…]`, the
/// displacements sampled along the axis `y = z = 0.5`.
pub fn pull_test_profile(n_per_side: usize, mu_f: f64, level: u32, samples: usize) -> Result<Vec<f64>, String> {
    let s = |e: thinfiber::Error| e.to_string();
    if level > MAX_DEMO_LEVEL {
        return Err(format!("level {level} exceeds the demo limit {MAX_DEMO_LEVEL}"));
    }
    if samples < 2 {
        return Err("need at least two samples".into());
    }
    let mat = MaterialParams::new(Lame::new(0.4, 1.0), Lame::new(0.4, mu_f)).map_err(s)?;
    let beta = 0.1;
    let reference = rule_of_mixtures(&mat, beta).map_err(s)?;
    let bcs = BoundaryConditions::pull_test(
        Point::new(0.05, 0.0, 0.0),
        Nitsche::default().with_penalty_modulus(reference.lame().p_modulus()),
    );
    let mesh = HexMesh::new(level).map_err(s)?;
    let bg = DofMap::background(&mesh);
    let network = uniform_parallel_fibers(n_per_side, beta, 0, 0.05).map_err(s)?;
    let fibers = build_fiber_mesh(&network, level).map_err(s)?;
    let fd = DofMap::fibers(&fibers);
    let (a, rhs) = assemble_background_system(&mesh, &bg, mat.matrix, &bcs).map_err(s)?;
    let k = assemble_fiber_stiffness(&fibers, &fd, &mat, GeometricFactor::Evaluate).map_err(s)?;
    let b = assemble_coupling(&mesh, &bg, &fibers, &fd, COUPLING_QUAD_ORDER).map_err(s)?;
    let l = assemble_fiber_mass(&fibers, &fd);
    let opts = SolveOptions::default();
    let coupled = solve_coupled(&a, &k, &b, &l, &rhs, &opts).map_err(s)?;
    let hom = solve_homogenized(&mesh, &bg, &reference, &bcs, &opts).map_err(s)?;
    let err = l2_error(&coupled.u, &hom.x, &mesh, &bg).map_err(s)?;

    let mut out = vec![err, coupled.iterations as f64, samples as f64];
    for field in [&coupled.u, &hom.x] {
        for i in 0..samples {
            let x = Point::new(i as f64 / (samples - 1) as f64, 0.5, 0.5);
            out.push(evaluate_field(&mesh, field, &x).map_err(s)?[0]);
        }
    }
    Ok(out)
}

/// Lamé pair `[λ, μ]` from Young's modulus and Poisson's ratio.
pub fn lame_pair(e: f64, nu: f64) -> Result<Vec<f64>, String> {
    let l = lame_from_young_poisson(e, nu).map_err(|e| e.to_string())?;
    Ok(vec![l.lambda, l.mu])
}

#[wasm_bindgen(js_name = halpinTsai)]
pub fn halpin_tsai_js(e_f: f64, e_m: f64, aspect: f64, beta: f64) -> Result<Vec<f64>, JsError> {
    halpin_tsai_values(e_f, e_m, aspect, beta).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = geometricFactorCurve)]
pub fn geometric_factor_curve_js(a: f64, max_ka: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    geometric_factor_curve(a, max_ka, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = pullTest)]
pub fn pull_test_js(n_per_side: usize, mu_f: f64, level: u32, samples: usize) -> Result<Vec<f64>, JsError> {
    pull_test_profile(n_per_side, mu_f, level, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = lamePair)]
pub fn lame_pair_js(e: f64, nu: f64) -> Result<Vec<f64>, JsError> {
    lame_pair(e, nu).map_err(|e| JsError::new(&e))
}
