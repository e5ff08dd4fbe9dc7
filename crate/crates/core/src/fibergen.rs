//! Fiber network generators: regular arrays of parallel continuous fibers,
//! and chopped fibers placed by random sequential adsorption in planes
//! parallel to `xy`, clipped at the cube boundary, without overlap rejection.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::mesh::{FiberCurve, FiberNetwork, Point};

/// Identifier of the generator behind [`random_planar_fibers`].
pub const RNG_ALGORITHM: &str = "chacha8";

/// Default inset of uniform fibers from the faces they run towards.
pub const DEFAULT_MARGIN: f64 = 0.05;

/// Clipped fibers shorter than this are redrawn.
pub const MIN_FIBER_LENGTH: f64 = 1e-6;

/// `n_per_side²` straight fibers along `axis`, centred on a regular grid of
/// the cross-section, spanning `[margin, 1 − margin]`, with the radius chosen
/// so the volume ratio equals `beta`.
pub fn uniform_parallel_fibers(n_per_side: usize, beta: f64, axis: usize, margin: f64) -> Result<FiberNetwork> {
    if n_per_side == 0 {
        return Err(Error::param("n_per_side", "must be at least 1"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::param("beta", format!("{beta} outside (0, 1)")));
    }
    if axis > 2 {
        return Err(Error::param("axis", format!("{axis} not in 0..=2")));
    }
    if !(0.0..0.25).contains(&margin) {
        return Err(Error::param("margin", format!("{margin} outside [0, 0.25)")));
    }
    let n_f = n_per_side * n_per_side;
    let fiber_length = 1.0 - 2.0 * margin;
    let radius = (beta / (n_f as f64 * PI * fiber_length)).sqrt();
    let spacing = 1.0 / n_per_side as f64;
    if radius >= 0.5 * spacing {
        return Err(Error::FiberOverlap { radius, spacing });
    }
    let across: Vec<usize> = (0..3).filter(|&d| d != axis).collect();
    let mut curves = Vec::with_capacity(n_f);
    for j in 0..n_per_side {
        for i in 0..n_per_side {
            let mut start = Point::zeros();
            start[across[0]] = (i as f64 + 0.5) * spacing;
            start[across[1]] = (j as f64 + 0.5) * spacing;
            let mut end = start;
            start[axis] = margin;
            end[axis] = 1.0 - margin;
            curves.push(FiberCurve::segment(start, end)?);
        }
    }
    FiberNetwork::new(curves, radius)
}

/// Result of a random placement, with the number of degenerate draws redone.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomPlacement {
    pub network: FiberNetwork,
    pub resampled: usize,
}

fn unit_interval(rng: &mut ChaCha8Rng) -> f64 {
    // 53 random bits, uniform on [0, 1)
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn angle(rng: &mut ChaCha8Rng) -> f64 {
    2.0 * PI * (rng.next_u64() as f64 / 18_446_744_073_709_551_616.0)
}

/// Intersects the ray `start + t·dir`, `t ∈ [0, 1]`, with the unit cube; the
/// start must lie inside.
pub fn clip_to_cube(start: &Point, dir: &Point) -> f64 {
    let mut t_max: f64 = 1.0;
    for d in 0..3 {
        if dir[d] > 0.0 {
            t_max = t_max.min((1.0 - start[d]) / dir[d]);
        } else if dir[d] < 0.0 {
            t_max = t_max.min(-start[d] / dir[d]);
        }
    }
    t_max.max(0.0)
}

/// Places `n_f` straight fibers: uniform start point in the cube, uniform
/// in-plane angle, extent `length`, cut where it leaves the cube.
pub fn random_planar_fibers(n_f: usize, length: f64, radius: f64, seed: u64) -> Result<RandomPlacement> {
    if n_f == 0 {
        return Err(Error::param("n_f", "must be at least 1"));
    }
    if !(length > 0.0) || !(radius > 0.0) {
        return Err(Error::param("length", format!("length {length} and radius {radius} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut curves = Vec::with_capacity(n_f);
    let mut resampled = 0;
    while curves.len() < n_f {
        let start = Point::new(unit_interval(&mut rng), unit_interval(&mut rng), unit_interval(&mut rng));
        let phi = angle(&mut rng);
        let dir = Point::new(phi.cos(), phi.sin(), 0.0) * length;
        let t = clip_to_cube(&start, &dir);
        if t * length < MIN_FIBER_LENGTH {
            resampled += 1;
            continue;
        }
        let end = (start + dir * t).map(|c| c.clamp(0.0, 1.0));
        curves.push(FiberCurve::segment(start, end)?);
    }
    Ok(RandomPlacement {
        network: FiberNetwork::new(curves, radius)?,
        resampled,
    })
}

/// Metadata carried in the header of a network file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NetworkHeader {
    pub mode: String,
    pub seed: Option<u64>,
    pub rng: Option<String>,
}

/// Writes one fiber per line as `x0 y0 z0 x1 y1 z1 radius` after `#` header lines.
pub fn write_network<W: Write>(network: &FiberNetwork, header: &NetworkHeader, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# thinfiber network")?;
    writeln!(out, "# mode={}", header.mode)?;
    if let Some(seed) = header.seed {
        writeln!(out, "# seed={seed}")?;
    }
    if let Some(rng) = &header.rng {
        writeln!(out, "# rng={rng}")?;
    }
    writeln!(out, "# fibers={}", network.len())?;
    let r = network.radius();
    for c in network.curves() {
        for w in c.vertices().windows(2) {
            let (p, q) = (w[0], w[1]);
            writeln!(out, "{} {} {} {} {} {} {}", p[0], p[1], p[2], q[0], q[1], q[2], r)?;
        }
    }
    Ok(())
}

pub fn read_network<R: BufRead>(input: R) -> Result<(FiberNetwork, NetworkHeader)> {
    let mut header = NetworkHeader::default();
    let mut curves = Vec::new();
    let mut radius: Option<f64> = None;
    for (lineno, line) in input.lines().enumerate() {
        let loc = || format!("line {}", lineno + 1);
        let line = line.map_err(|e| Error::Parse {
            location: loc(),
            message: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.trim().split_once('=') {
                match k.trim() {
                    "mode" => header.mode = v.trim().to_string(),
                    "seed" => {
                        header.seed = Some(v.trim().parse().map_err(|_| Error::Parse {
                            location: loc(),
                            message: format!("bad seed `{}`", v.trim()),
                        })?)
                    }
                    "rng" => header.rng = Some(v.trim().to_string()),
                    _ => {}
                }
            }
            continue;
        }
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                location: loc(),
                message: e.to_string(),
            })?;
        if nums.len() != 7 {
            return Err(Error::Parse {
                location: loc(),
                message: format!("expected 7 numbers, found {}", nums.len()),
            });
        }
        match radius {
            None => radius = Some(nums[6]),
            Some(r) if r != nums[6] => {
                return Err(Error::Parse {
                    location: loc(),
                    message: format!("radius {} differs from network radius {r}", nums[6]),
                })
            }
            _ => {}
        }
        curves.push(FiberCurve::segment(
            Point::new(nums[0], nums[1], nums[2]),
            Point::new(nums[3], nums[4], nums[5]),
        )?);
    }
    let radius = radius.ok_or_else(|| Error::Parse {
        location: "end of file".into(),
        message: "no fibers".into(),
    })?;
    Ok((FiberNetwork::new(curves, radius)?, header))
}
