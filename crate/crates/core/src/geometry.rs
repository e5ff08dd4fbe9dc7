//! Curve geometry along fiber centerlines: Frenet frames, the geometric
//! factor `g` that collapses tube integrals onto the centerline, and the
//! disk average of a background field.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fem::evaluate_field;
use crate::mesh::{FiberCurve, HexMesh, Point};
use crate::quadrature::GaussRule;

/// Curvature below which the normal is considered undefined.
pub const FLAT_CURVATURE: f64 = 1e-12;

/// Default radial and angular point counts for disk quadrature.
pub const DISK_RADIAL_POINTS: usize = 16;
pub const DISK_ANGULAR_POINTS: usize = 32;

/// Arclength-parametrized curve with derivatives up to third order.
pub trait ArclengthCurve {
    fn length(&self) -> f64;
    fn position(&self, s: f64) -> Point;
    fn d1(&self, s: f64) -> Point;
    fn d2(&self, s: f64) -> Point;
    fn d3(&self, s: f64) -> Point;
}

/// Smooth curves with closed-form derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticCurve {
    Line { origin: Point, direction: Point, length: f64 },
    /// Circle in the plane `z = center.z`, counter-clockwise from angle 0.
    Circle { center: Point, radius: f64 },
    /// `(r cos t, r sin t, c t)` around the z-axis through `origin`, for `t ∈ [0, turns·2π]`.
    Helix { origin: Point, radius: f64, pitch: f64, turns: f64 },
}

impl AnalyticCurve {
    fn helix_speed(radius: f64, pitch: f64) -> f64 {
        (radius * radius + pitch * pitch).sqrt()
    }
}

impl ArclengthCurve for AnalyticCurve {
    fn length(&self) -> f64 {
        match *self {
            AnalyticCurve::Line { length, .. } => length,
            AnalyticCurve::Circle { radius, .. } => 2.0 * PI * radius,
            AnalyticCurve::Helix { radius, pitch, turns, .. } => {
                2.0 * PI * turns * Self::helix_speed(radius, pitch)
            }
        }
    }

    fn position(&self, s: f64) -> Point {
        match *self {
            AnalyticCurve::Line { origin, direction, .. } => origin + direction.normalize() * s,
            AnalyticCurve::Circle { center, radius } => {
                let t = s / radius;
                center + Point::new(radius * t.cos(), radius * t.sin(), 0.0)
            }
            AnalyticCurve::Helix { origin, radius, pitch, .. } => {
                let t = s / Self::helix_speed(radius, pitch);
                origin + Point::new(radius * t.cos(), radius * t.sin(), pitch * t)
            }
        }
    }

    fn d1(&self, s: f64) -> Point {
        match *self {
            AnalyticCurve::Line { direction, .. } => direction.normalize(),
            AnalyticCurve::Circle { radius, .. } => {
                let t = s / radius;
                Point::new(-t.sin(), t.cos(), 0.0)
            }
            AnalyticCurve::Helix { radius, pitch, .. } => {
                let c = Self::helix_speed(radius, pitch);
                let t = s / c;
                Point::new(-radius * t.sin(), radius * t.cos(), pitch) / c
            }
        }
    }

    fn d2(&self, s: f64) -> Point {
        match *self {
            AnalyticCurve::Line { .. } => Point::zeros(),
            AnalyticCurve::Circle { radius, .. } => {
                let t = s / radius;
                Point::new(-t.cos(), -t.sin(), 0.0) / radius
            }
            AnalyticCurve::Helix { radius, pitch, .. } => {
                let c = Self::helix_speed(radius, pitch);
                let t = s / c;
                Point::new(-radius * t.cos(), -radius * t.sin(), 0.0) / (c * c)
            }
        }
    }

    fn d3(&self, s: f64) -> Point {
        match *self {
            AnalyticCurve::Line { .. } => Point::zeros(),
            AnalyticCurve::Circle { radius, .. } => {
                let t = s / radius;
                Point::new(t.sin(), -t.cos(), 0.0) / (radius * radius)
            }
            AnalyticCurve::Helix { radius, pitch, .. } => {
                let c = Self::helix_speed(radius, pitch);
                let t = s / c;
                Point::new(radius * t.sin(), -radius * t.cos(), 0.0) / (c * c * c)
            }
        }
    }
}

/// Polylines are straight within each segment; the derivative at a vertex is
/// taken from the segment that starts there.
impl ArclengthCurve for FiberCurve {
    fn length(&self) -> f64 {
        FiberCurve::length(self)
    }

    fn position(&self, s: f64) -> Point {
        let (seg, offset) = polyline_segment(self, s);
        let v = self.vertices();
        let dir = (v[seg + 1] - v[seg]).normalize();
        v[seg] + dir * offset
    }

    fn d1(&self, s: f64) -> Point {
        let (seg, _) = polyline_segment(self, s);
        let v = self.vertices();
        (v[seg + 1] - v[seg]).normalize()
    }

    fn d2(&self, _s: f64) -> Point {
        Point::zeros()
    }

    fn d3(&self, _s: f64) -> Point {
        Point::zeros()
    }
}

fn polyline_segment(curve: &FiberCurve, s: f64) -> (usize, f64) {
    let mut acc = 0.0;
    let n = curve.vertices().len() - 1;
    for (i, len) in curve.segment_lengths().enumerate() {
        if s < acc + len || i == n - 1 {
            return (i, s - acc);
        }
        acc += len;
    }
    unreachable!("polyline has at least one segment")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrenetFrame {
    pub tangent: Point,
    pub normal: Point,
    pub binormal: Point,
    pub curvature: f64,
    pub torsion: f64,
}

/// Frenet trihedron at arclength `s`.
///
/// Where the curvature vanishes the normal is the normalized projection of the
/// coordinate axis least aligned with the tangent, and κ = τ = 0.
pub fn frenet_frame<C: ArclengthCurve + ?Sized>(curve: &C, s: f64) -> Result<FrenetFrame> {
    let len = curve.length();
    if !(0.0..=len).contains(&s) {
        return Err(Error::param("s", format!("{s} outside [0, {len}]")));
    }
    let tangent = curve.d1(s).normalize();
    let dd = curve.d2(s);
    let kappa = dd.norm();
    if kappa < FLAT_CURVATURE {
        let normal = fallback_normal(&tangent);
        return Ok(FrenetFrame {
            tangent,
            normal,
            binormal: tangent.cross(&normal),
            curvature: 0.0,
            torsion: 0.0,
        });
    }
    let normal = (dd - tangent * tangent.dot(&dd)).normalize();
    let binormal = tangent.cross(&normal);
    let torsion = tangent.cross(&dd).dot(&curve.d3(s)) / (kappa * kappa);
    Ok(FrenetFrame {
        tangent,
        normal,
        binormal,
        curvature: kappa,
        torsion,
    })
}

fn fallback_normal(t: &Point) -> Point {
    let axis = (0..3)
        .min_by(|&a, &b| t[a].abs().total_cmp(&t[b].abs()))
        .unwrap();
    let mut e = Point::zeros();
    e[axis] = 1.0;
    (e - t * t.dot(&e)).normalize()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TubeValidity {
    pub max_curvature: f64,
    pub radius: f64,
    pub valid: bool,
}

impl TubeValidity {
    pub fn new(max_curvature: f64, radius: f64) -> Self {
        TubeValidity {
            max_curvature,
            radius,
            valid: radius > 0.0 && max_curvature * radius < 1.0,
        }
    }

    pub fn check(self) -> Result<Self> {
        if self.valid {
            Ok(self)
        } else {
            Err(Error::InvalidTube {
                curvature: self.max_curvature,
                radius: self.radius,
            })
        }
    }
}

/// Equal-weight nodes on the unit period: the Gaussian rule for
/// trigonometric polynomials, exact up to degree `n − 1`.
fn periodic_rule(n: usize) -> Vec<(f64, f64)> {
    let n = n.max(1);
    (0..n).map(|i| ((i as f64 + 0.5) / n as f64, 1.0 / n as f64)).collect()
}

/// Geometric factor with the default disk quadrature.
pub fn geometric_factor_g(curvature: f64, radius: f64, ref_angle: f64) -> Result<f64> {
    geometric_factor_g_with(curvature, radius, ref_angle, DISK_RADIAL_POINTS, DISK_ANGULAR_POINTS)
}

/// Mean over the disk of radius `a` (area measure `r dr dθ`, normalized by
/// `πa²`) of `1 / (1 − κ r cos(θ − θ̂))`.
pub fn geometric_factor_g_with(
    curvature: f64,
    radius: f64,
    ref_angle: f64,
    radial: usize,
    angular: usize,
) -> Result<f64> {
    if curvature < 0.0 || !curvature.is_finite() {
        return Err(Error::param("curvature", format!("{curvature} must be finite and nonnegative")));
    }
    TubeValidity::new(curvature, radius).check()?;
    if curvature == 0.0 {
        return Ok(1.0);
    }
    let rr = GaussRule::new(radial);
    let rt = periodic_rule(angular);
    let mut acc = 0.0;
    for (xr, wr) in rr.iter() {
        let r = xr * radius;
        for &(xt, wt) in &rt {
            let theta = 2.0 * PI * xt;
            acc += wr * wt * r / (1.0 - curvature * r * (theta - ref_angle).cos());
        }
    }
    // acc·a·2π is the integral; divide by πa²
    Ok(acc * radius * 2.0 * PI / (PI * radius * radius))
}

/// Average of a background vector field over the disk of radius `a`
/// orthogonal to `frame.tangent` at `center`.
pub fn tubular_average(
    mesh: &HexMesh,
    field: &[f64],
    center: &Point,
    frame: &FrenetFrame,
    radius: f64,
    quad_order: usize,
) -> Result<Point> {
    TubeValidity::new(frame.curvature, radius).check()?;
    let t = frame.tangent;
    for d in 0..3 {
        let reach = radius * (1.0 - t[d] * t[d]).max(0.0).sqrt();
        if center[d] - reach < 0.0 || center[d] + reach > 1.0 {
            return Err(Error::OutOfDomain {
                x: center[0],
                y: center[1],
                z: center[2],
            });
        }
    }
    let rr = GaussRule::new(quad_order.max(1));
    let rt = periodic_rule(2 * quad_order.max(1));
    let mut acc = Point::zeros();
    for (xr, wr) in rr.iter() {
        let r = xr * radius;
        for &(xt, wt) in &rt {
            let theta = 2.0 * PI * xt;
            let p = center + (frame.normal * theta.cos() + frame.binormal * theta.sin()) * r;
            let p = p.map(|c| c.clamp(0.0, 1.0));
            acc += evaluate_field(mesh, field, &p)? * (wr * wt * xr);
        }
    }
    // ∫ r dr dθ over the reference square is a²/2 · 2π; normalizing by πa² leaves 2·Σ w r̂
    Ok(acc * 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g_closed_form(k: f64, a: f64) -> f64 {
        let c = k * k * a * a;
        2.0 * (1.0 - (1.0 - c).sqrt()) / c
    }

    /// Nested-quadrature oracle with its own angular integration in closed form.
    fn g_nested_oracle(k: f64, a: f64) -> f64 {
        let rule = GaussRule::new(40);
        let inner: f64 = rule
            .iter()
            .map(|(x, w)| {
                let r = x * a;
                w * r * 2.0 * PI / (1.0 - (k * r).powi(2)).sqrt()
            })
            .sum();
        inner * a / (PI * a * a)
    }

    #[test]
    fn g_examples() {
        assert_eq!(geometric_factor_g(0.0, 0.3, 0.0).unwrap(), 1.0);
        let g = geometric_factor_g(0.5, 0.1, 0.0).unwrap();
        assert!((g - g_closed_form(0.5, 0.1)).abs() < 1e-12);
        assert!((g - 1.000626).abs() < 1e-6);
        assert!((g_nested_oracle(0.5, 0.1) - g_closed_form(0.5, 0.1)).abs() < 1e-14);
        assert!(matches!(geometric_factor_g(5.0, 0.2, 0.0), Err(Error::InvalidTube { .. })));
    }

    #[test]
    fn g_independent_of_reference_angle() {
        let g0 = geometric_factor_g(3.0, 0.2, 0.0).unwrap();
        let g1 = geometric_factor_g(3.0, 0.2, 1.3).unwrap();
        assert!((g0 - g1).abs() < 1e-6);
    }

    #[test]
    fn g_quadrature_converges() {
        let (k, a) = (4.0, 0.2);
        let exact = g_closed_form(k, a);
        let mut prev = f64::INFINITY;
        for n in [2, 4, 8, 16, 32] {
            let err = (geometric_factor_g_with(k, a, 0.0, n, 2 * n).unwrap() - exact).abs();
            assert!(err <= prev / 2.0 || err < 1e-14, "n={n}: {err} vs {prev}");
            prev = err;
        }
        assert!(prev < 1e-13);
    }

    #[test]
    fn g_monotone_in_curvature() {
        let a = 0.1;
        let mut prev = 1.0;
        for i in 0..=99 {
            let k = (1.0 - 1e-3) / a * i as f64 / 99.0;
            let g = geometric_factor_g_with(k, a, 0.0, 16, 64).unwrap();
            assert!(g >= prev - 1e-14, "k={k}");
            prev = g;
        }
    }

    #[test]
    fn frenet_line_circle_helix() {
        let line = AnalyticCurve::Line {
            origin: Point::new(0.0, 0.2, 0.3),
            direction: Point::new(2.0, 0.0, 0.0),
            length: 1.0,
        };
        let f = frenet_frame(&line, 0.4).unwrap();
        assert_eq!(f.tangent, Point::new(1.0, 0.0, 0.0));
        assert_eq!((f.curvature, f.torsion), (0.0, 0.0));
        assert!(f.normal.dot(&f.tangent).abs() < 1e-15);

        let circle = AnalyticCurve::Circle {
            center: Point::new(0.0, 0.0, 0.0),
            radius: 2.0,
        };
        let f = frenet_frame(&circle, 1.0).unwrap();
        assert!((f.curvature - 0.5).abs() < 1e-14);
        assert!(f.torsion.abs() < 1e-14);
        assert!((f.binormal - Point::new(0.0, 0.0, 1.0)).norm() < 1e-14);

        let helix = AnalyticCurve::Helix {
            origin: Point::zeros(),
            radius: 1.0,
            pitch: 1.0,
            turns: 1.0,
        };
        let f = frenet_frame(&helix, 0.7).unwrap();
        assert!((f.curvature - 0.5).abs() < 1e-14);
        assert!((f.torsion - 0.5).abs() < 1e-14);

        assert!(frenet_frame(&helix, -0.1).is_err());
        assert!(frenet_frame(&helix, helix.length() + 1e-9).is_err());
    }

    #[test]
    fn helix_frame_matches_finite_differences() {
        let helix = AnalyticCurve::Helix {
            origin: Point::zeros(),
            radius: 1.0,
            pitch: 1.0,
            turns: 2.0,
        };
        let eps = 1e-4;
        for &s in &[0.3, 1.7, 4.2] {
            let p = |x: f64| helix.position(x);
            let d1 = (p(s + eps) - p(s - eps)) / (2.0 * eps);
            let d2 = (p(s + eps) - 2.0 * p(s) + p(s - eps)) / (eps * eps);
            assert!((d1 - helix.d1(s)).norm() < 1e-7);
            assert!((d2.norm() - 0.5).abs() < 1e-6);
            // torsion from finite differences of the binormal: db/ds = -τ n
            let f0 = frenet_frame(&helix, s).unwrap();
            let fb = frenet_frame(&helix, s + eps).unwrap().binormal;
            let fa = frenet_frame(&helix, s - eps).unwrap().binormal;
            let db = (fb - fa) / (2.0 * eps);
            assert!((-db.dot(&f0.normal) - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn polyline_frames_are_flat() {
        let c = FiberCurve::new(vec![
            Point::new(0.1, 0.1, 0.1),
            Point::new(0.5, 0.1, 0.1),
            Point::new(0.5, 0.6, 0.1),
        ])
        .unwrap();
        let f = frenet_frame(&c, 0.2).unwrap();
        assert_eq!(f.tangent, Point::new(1.0, 0.0, 0.0));
        let f = frenet_frame(&c, 0.6).unwrap();
        assert!((f.tangent - Point::new(0.0, 1.0, 0.0)).norm() < 1e-15);
        assert_eq!(f.curvature, 0.0);
        assert!((c.position(0.6) - Point::new(0.5, 0.3, 0.1)).norm() < 1e-15);
    }

    #[test]
    fn average_examples() {
        let mesh = HexMesh::new(2).unwrap();
        let n = mesh.n_vertices();
        let frame = frenet_frame(
            &AnalyticCurve::Line {
                origin: Point::new(0.0, 0.5, 0.5),
                direction: Point::new(1.0, 0.0, 0.0),
                length: 1.0,
            },
            0.4,
        )
        .unwrap();
        let center = Point::new(0.4, 0.5, 0.5);

        let constant: Vec<f64> = (0..n).flat_map(|_| [1.5, -2.0, 0.25]).collect();
        let avg = tubular_average(&mesh, &constant, &center, &frame, 0.1, 4).unwrap();
        assert!((avg - Point::new(1.5, -2.0, 0.25)).norm() < 1e-13);

        let axial: Vec<f64> = mesh.vertices().flat_map(|p| [p[0], 0.0, 0.0]).collect();
        let avg = tubular_average(&mesh, &axial, &center, &frame, 0.1, 4).unwrap();
        assert!((avg[0] - 0.4).abs() < 1e-13);

        let transverse: Vec<f64> = mesh.vertices().flat_map(|p| [p[1], 0.0, 0.0]).collect();
        let avg = tubular_average(&mesh, &transverse, &center, &frame, 0.1, 4).unwrap();
        assert!((avg[0] - 0.5).abs() < 1e-13);

        let edge = Point::new(0.4, 0.05, 0.5);
        assert!(matches!(
            tubular_average(&mesh, &constant, &edge, &frame, 0.1, 4),
            Err(Error::OutOfDomain { .. })
        ));
    }

    proptest! {
        #[test]
        fn frames_are_orthonormal(s in 0.0f64..8.0, r in 0.2f64..2.0, c in 0.1f64..1.5) {
            let helix = AnalyticCurve::Helix { origin: Point::zeros(), radius: r, pitch: c, turns: 3.0 };
            let s = s.min(helix.length());
            let f = frenet_frame(&helix, s).unwrap();
            for v in [f.tangent, f.normal, f.binormal] {
                prop_assert!((v.norm() - 1.0).abs() < 1e-10);
            }
            prop_assert!(f.tangent.dot(&f.normal).abs() < 1e-10);
            prop_assert!(f.tangent.dot(&f.binormal).abs() < 1e-10);
            prop_assert!(f.normal.dot(&f.binormal).abs() < 1e-10);
            prop_assert_eq!(f.binormal, f.tangent.cross(&f.normal));
            prop_assert!(f.curvature >= 0.0);
            prop_assert!((f.curvature - r / (r * r + c * c)).abs() < 1e-12);
            prop_assert!((f.torsion - c / (r * r + c * c)).abs() < 1e-12);
        }
    }
}
