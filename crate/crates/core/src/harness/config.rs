//! Experiment configuration: flat `key = value` files mirrored by CLI flags.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fem::{Lame, MaterialParams, DEFAULT_NITSCHE_GAMMA};
use crate::fibergen::DEFAULT_MARGIN;
use crate::homogenize::lame_from_young_poisson;
use crate::solver::{SolveOptions, DEFAULT_MAX_ITER, INNER_TOL, OUTER_TOL};

/// Chopped-fiber rows `(length, radius, count)` at volume ratio 0.135 and
/// `l/(2r) = 10`.
pub const RANDOM_FIBER_TABLE: [(f64, f64, usize); 7] = [
    (0.6, 0.03, 79),
    (0.4, 0.02, 268),
    (0.3, 0.015, 637),
    (0.25, 0.0125, 1100),
    (0.225, 0.01125, 1509),
    (0.2, 0.01, 2149),
    (0.18, 0.009, 2947),
];

/// Magnitude of the axial traction on face 1.
pub const DEFAULT_TRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    Pull,
    Push,
    RandomPlanar,
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pull" => Ok(TestKind::Pull),
            "push" => Ok(TestKind::Push),
            "random-planar" | "random" => Ok(TestKind::RandomPlanar),
            other => Err(Error::param("test", format!("unknown test kind `{other}`"))),
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestKind::Pull => "pull",
            TestKind::Push => "push",
            TestKind::RandomPlanar => "random-planar",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub test: TestKind,
    pub r_omega: u32,
    pub r_gamma: u32,
    pub material: MaterialParams,
    pub beta: f64,
    pub fibers: Vec<usize>,
    /// Fiber aspect `l/(2r)` for chopped fibers.
    pub aspect: f64,
    pub margin: f64,
    pub traction: f64,
    pub gamma: f64,
    /// Nitsche penalty modulus shared by the coupled and reference solves;
    /// `None` takes `2μ + λ` of the reference material.
    pub penalty_modulus: Option<f64>,
    pub tol: f64,
    pub inner_tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Defaults of each test family.
    pub fn for_test(test: TestKind) -> Self {
        match test {
            TestKind::Pull | TestKind::Push => ExperimentConfig {
                test,
                r_omega: 3,
                r_gamma: 3,
                material: MaterialParams {
                    matrix: Lame::new(0.4, 1.0),
                    fiber: Lame::new(0.4, 1000.0),
                },
                beta: 0.1,
                fibers: vec![16, 36, 64, 144, 256, 400],
                aspect: 10.0,
                margin: DEFAULT_MARGIN,
                traction: DEFAULT_TRACTION,
                gamma: DEFAULT_NITSCHE_GAMMA,
                penalty_modulus: None,
                tol: OUTER_TOL,
                inner_tol: INNER_TOL,
                max_iter: DEFAULT_MAX_ITER,
                seed: 0,
                out: None,
            },
            TestKind::RandomPlanar => ExperimentConfig {
                test,
                r_omega: 4,
                r_gamma: 2,
                material: MaterialParams {
                    matrix: lame_from_young_poisson(3.0, 0.38).expect("valid constants"),
                    fiber: lame_from_young_poisson(70.0, 0.2).expect("valid constants"),
                },
                beta: 0.135,
                fibers: RANDOM_FIBER_TABLE.iter().map(|r| r.2).filter(|&n| n <= 1100).collect(),
                aspect: 10.0,
                margin: 0.0,
                traction: DEFAULT_TRACTION,
                gamma: DEFAULT_NITSCHE_GAMMA,
                penalty_modulus: None,
                tol: OUTER_TOL,
                inner_tol: INNER_TOL,
                max_iter: DEFAULT_MAX_ITER,
                seed: 1,
                out: None,
            },
        }
    }

    /// Parses a config file body. The `test` key selects the defaults; every
    /// other key overrides them.
    pub fn parse(text: &str) -> Result<Self> {
        let pairs = parse_pairs(text)?;
        let test = pairs
            .iter()
            .find(|(k, _, _)| k == "test")
            .map(|(_, v, _)| v.parse())
            .transpose()?
            .unwrap_or(TestKind::Pull);
        let mut cfg = Self::for_test(test);
        let mut young = YoungOverrides::default();
        for (key, value, line) in &pairs {
            cfg.set(key, value, &mut young).map_err(|e| match e {
                Error::InvalidParameter { name, reason } => Error::Parse {
                    location: format!("line {line}"),
                    message: format!("{name}: {reason}"),
                },
                other => other,
            })?;
        }
        young.apply(&mut cfg)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `key = value` overrides in order (CLI flags use this path).
    pub fn apply_overrides<'a>(&mut self, pairs: impl IntoIterator<Item = (&'a str, String)>) -> Result<()> {
        let mut young = YoungOverrides::default();
        for (k, v) in pairs {
            self.set(k, &v, &mut young)?;
        }
        young.apply(self)?;
        self.validate()
    }

    fn set(&mut self, key: &str, value: &str, young: &mut YoungOverrides) -> Result<()> {
        fn num<T: FromStr>(name: &'static str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::param(name, format!("cannot parse `{v}`")))
        }
        match key {
            "test" => {
                let kind: TestKind = value.parse()?;
                if kind != self.test {
                    // keep explicit fields but switch the family
                    self.test = kind;
                }
            }
            "r_omega" | "r-omega" => self.r_omega = num("r_omega", value)?,
            "r_gamma" | "r-gamma" => self.r_gamma = num("r_gamma", value)?,
            "lambda" | "lambda_m" => self.material.matrix.lambda = num("lambda", value)?,
            "mu" | "mu_m" => self.material.matrix.mu = num("mu", value)?,
            "lambda_f" | "lambda-f" => self.material.fiber.lambda = num("lambda_f", value)?,
            "mu_f" | "mu-f" => self.material.fiber.mu = num("mu_f", value)?,
            "e_m" => young.e_m = Some(num("e_m", value)?),
            "nu_m" => young.nu_m = Some(num("nu_m", value)?),
            "e_f" => young.e_f = Some(num("e_f", value)?),
            "nu_f" => young.nu_f = Some(num("nu_f", value)?),
            "beta" => self.beta = num("beta", value)?,
            "fibers" => {
                self.fibers = value
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| num::<usize>("fibers", s))
                    .collect::<Result<_>>()?
            }
            "aspect" => self.aspect = num("aspect", value)?,
            "margin" => self.margin = num("margin", value)?,
            "traction" => self.traction = num("traction", value)?,
            "gamma" => self.gamma = num("gamma", value)?,
            "penalty_modulus" | "penalty-modulus" => self.penalty_modulus = Some(num("penalty_modulus", value)?),
            "tol" => self.tol = num("tol", value)?,
            "inner_tol" | "inner-tol" => self.inner_tol = num("inner_tol", value)?,
            "max_iter" | "max-iter" => self.max_iter = num("max_iter", value)?,
            "seed" => self.seed = num("seed", value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            other => return Err(Error::param("config", format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        if self.r_omega > crate::mesh::MAX_LEVEL {
            return Err(Error::Capacity {
                level: self.r_omega,
                max: crate::mesh::MAX_LEVEL,
            });
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::param("beta", format!("{} outside (0, 1)", self.beta)));
        }
        if self.penalty_modulus.is_some_and(|p| !(p > 0.0)) {
            return Err(Error::param("penalty_modulus", "must be positive"));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::param("gamma", format!("{} must be positive", self.gamma)));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) || !(self.inner_tol > 0.0 && self.inner_tol < 1.0) {
            return Err(Error::param("tol", "tolerances must lie in (0, 1)"));
        }
        if !(self.aspect > 0.0) {
            return Err(Error::param("aspect", "must be positive"));
        }
        if matches!(self.test, TestKind::Pull | TestKind::Push) {
            for &n in &self.fibers {
                let side = (n as f64).sqrt().round() as usize;
                if side * side != n {
                    return Err(Error::param("fibers", format!("{n} is not a perfect square")));
                }
            }
        }
        Ok(())
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            inner_tol: self.inner_tol,
        }
    }

    /// Chopped-fiber `(length, radius)` for a fiber count: the tabulated row
    /// when one matches, otherwise the pair reaching `beta` at the configured aspect.
    pub fn random_fiber_size(&self, n_f: usize) -> (f64, f64) {
        if let Some(&(l, r, _)) = RANDOM_FIBER_TABLE.iter().find(|row| row.2 == n_f) {
            if (self.beta - 0.135).abs() < 1e-12 && (self.aspect - 10.0).abs() < 1e-12 {
                return (l, r);
            }
        }
        // n π r² (2 aspect r) = beta
        let r = (self.beta / (2.0 * self.aspect * std::f64::consts::PI * n_f as f64)).cbrt();
        (2.0 * self.aspect * r, r)
    }

    /// Config file body reproducing this configuration.
    pub fn to_text(&self) -> String {
        let m = &self.material;
        let mut s = format!(
            "test = {}\nr_omega = {}\nr_gamma = {}\nlambda = {}\nmu = {}\nlambda_f = {}\nmu_f = {}\nbeta = {}\n",
            self.test, self.r_omega, self.r_gamma, m.matrix.lambda, m.matrix.mu, m.fiber.lambda, m.fiber.mu, self.beta
        );
        let fibers: Vec<String> = self.fibers.iter().map(|n| n.to_string()).collect();
        s += &format!(
            "fibers = {}\naspect = {}\nmargin = {}\ntraction = {}\ngamma = {}\ntol = {}\ninner_tol = {}\nmax_iter = {}\nseed = {}\n",
            fibers.join(","),
            self.aspect,
            self.margin,
            self.traction,
            self.gamma,
            self.tol,
            self.inner_tol,
            self.max_iter,
            self.seed
        );
        if let Some(p) = self.penalty_modulus {
            s += &format!("penalty_modulus = {p}\n");
        }
        if let Some(out) = &self.out {
            s += &format!("out = {}\n", out.display());
        }
        s
    }
}

#[derive(Default)]
struct YoungOverrides {
    e_m: Option<f64>,
    nu_m: Option<f64>,
    e_f: Option<f64>,
    nu_f: Option<f64>,
}

impl YoungOverrides {
    fn apply(self, cfg: &mut ExperimentConfig) -> Result<()> {
        match (self.e_m, self.nu_m) {
            (Some(e), Some(nu)) => cfg.material.matrix = lame_from_young_poisson(e, nu)?,
            (None, None) => {}
            _ => return Err(Error::param("e_m", "e_m and nu_m must be given together")),
        }
        match (self.e_f, self.nu_f) {
            (Some(e), Some(nu)) => cfg.material.fiber = lame_from_young_poisson(e, nu)?,
            (None, None) => {}
            _ => return Err(Error::param("e_f", "e_f and nu_f must be given together")),
        }
        Ok(())
    }
}

fn parse_pairs(text: &str) -> Result<Vec<(String, String, usize)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            location: format!("line {}", i + 1),
            message: format!("expected `key = value`, found `{line}`"),
        })?;
        out.push((k.trim().to_string(), v.trim().to_string(), i + 1));
    }
    Ok(out)
}
