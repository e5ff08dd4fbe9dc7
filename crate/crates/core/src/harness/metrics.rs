use crate::error::{Error, Result};
use crate::fem::{DofMap, DIM};
use crate::mesh::{trilinear_values, HexMesh, Point};
use crate::quadrature::GaussRule;

/// `‖u − u_ref‖_{L²(Ω)}` of two trilinear background fields, 2×2×2 Gauss per cell.
pub fn l2_error(u: &[f64], u_ref: &[f64], mesh: &HexMesh, dofs: &DofMap) -> Result<f64> {
    for v in [u, u_ref] {
        if v.len() != dofs.n_dofs() {
            return Err(Error::DimensionMismatch {
                expected: dofs.n_dofs(),
                actual: v.len(),
            });
        }
    }
    let rule = GaussRule::new(2);
    let mut table = Vec::with_capacity(8);
    for (x, wx) in rule.iter() {
        for (y, wy) in rule.iter() {
            for (z, wz) in rule.iter() {
                table.push((trilinear_values(&Point::new(x, y, z)), wx * wy * wz));
            }
        }
    }
    let vol = mesh.h().powi(3);
    let mut total = 0.0;
    for cell in 0..mesh.n_cells() {
        let cd = dofs.cell_dofs(mesh, cell);
        for (vals, w) in &table {
            let mut diff = [0.0; DIM];
            for (a, n) in vals.iter().enumerate() {
                for (c, d) in diff.iter_mut().enumerate() {
                    let k = cd[DIM * a + c];
                    *d += n * (u[k] - u_ref[k]);
                }
            }
            total += w * vol * diff.iter().map(|d| d * d).sum::<f64>();
        }
    }
    Ok(total.sqrt())
}

/// Log-log slopes of an error sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Slopes {
    /// `ln(e₂/e₁) / ln(n₂/n₁)` for consecutive points.
    pub pairwise: Vec<f64>,
    /// Least-squares slope of `ln e` against `ln n`.
    pub least_squares: f64,
}

pub fn convergence_slope(errors: &[f64], counts: &[f64]) -> Result<Slopes> {
    if errors.len() != counts.len() {
        return Err(Error::DimensionMismatch {
            expected: counts.len(),
            actual: errors.len(),
        });
    }
    if errors.len() < 2 {
        return Err(Error::param("errors", "need at least two sweep points"));
    }
    if errors.iter().chain(counts).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::param("errors", "errors and counts must be positive"));
    }
    let pairwise = errors
        .windows(2)
        .zip(counts.windows(2))
        .map(|(e, n)| (e[1] / e[0]).ln() / (n[1] / n[0]).ln())
        .collect();
    let xs: Vec<f64> = counts.iter().map(|c| c.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::param("counts", "all fiber counts are equal"));
    }
    Ok(Slopes {
        pairwise,
        least_squares: sxy / sxx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l2_examples() {
        let mesh = HexMesh::new(2).unwrap();
        let dofs = DofMap::background(&mesh);
        let zero = vec![0.0; dofs.n_dofs()];
        let u = dofs.interpolate(mesh.vertices(), |p| Point::new(p[0], p[1] * p[2], 1.0));
        assert_eq!(l2_error(&u, &u, &mesh, &dofs).unwrap(), 0.0);
        let c = dofs.interpolate(mesh.vertices(), |_| Point::new(0.7, 0.0, 0.0));
        assert!((l2_error(&c, &zero, &mesh, &dofs).unwrap() - 0.7).abs() < 1e-14);
        let x = dofs.interpolate(mesh.vertices(), |p| Point::new(p[0], 0.0, 0.0));
        assert!((l2_error(&x, &zero, &mesh, &dofs).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!(l2_error(&x[1..], &zero, &mesh, &dofs).is_err());
    }

    #[test]
    fn slope_examples() {
        let s = convergence_slope(&[0.1, 0.05], &[100.0, 400.0]).unwrap();
        assert!((s.pairwise[0] + 0.5).abs() < 1e-15);
        assert!((s.least_squares + 0.5).abs() < 1e-15);
        let s = convergence_slope(&[0.3, 0.3, 0.3], &[1.0, 2.0, 5.0]).unwrap();
        assert!(s.pairwise.iter().all(|&p| p == 0.0) && s.least_squares == 0.0);
        let s = convergence_slope(&[1.0, 0.574], &[1.0, 2.0]).unwrap();
        assert!((s.pairwise[0] + 0.8).abs() < 1e-3);
        assert!(convergence_slope(&[1.0, 0.0], &[1.0, 2.0]).is_err());
        assert!(convergence_slope(&[1.0], &[1.0]).is_err());
        assert!(convergence_slope(&[1.0, 2.0], &[3.0, 3.0]).is_err());
    }

    #[test]
    fn slope_recovers_power_law() {
        let counts = [16.0, 36.0, 64.0, 144.0, 256.0, 400.0];
        for p in [0.4, 0.8, 1.3] {
            let errs: Vec<f64> = counts.iter().map(|n: &f64| 2.5 * n.powf(-p)).collect();
            let s = convergence_slope(&errs, &counts).unwrap();
            assert!((s.least_squares + p).abs() < 1e-12);
            assert!(s.pairwise.iter().all(|q| (q + p).abs() < 1e-12));
        }
    }
}
