use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thinfiber::fibergen::{
    random_planar_fibers, read_network, uniform_parallel_fibers, write_network, NetworkHeader, DEFAULT_MARGIN,
    RNG_ALGORITHM,
};
use thinfiber::harness::{
    convergence_slope, csv_string, run_experiment, solve_network, solve_one, write_vtk, ExperimentConfig, TestKind,
};
use thinfiber::homogenize::{halpin_tsai, lame_from_young_poisson};
use thinfiber::{Error, Result};

#[derive(Parser)]
#[command(name = "thinfiber", version, about = "Fiber-reinforced elasticity with immersed 1D fibers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a fiber-count sweep and write the error table as CSV.
    Run(ExperimentArgs),
    /// Print the Halpin-Tsai estimate for planar-random chopped fibers.
    HalpinTsai(HalpinTsaiArgs),
    /// Generate a fiber network file.
    GenFibers(GenArgs),
    /// Solve one coupled problem and dump the fields as VTK.
    SolveOne(SolveOneArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    test: Option<String>,
    #[arg(long)]
    r_omega: Option<u32>,
    #[arg(long)]
    r_gamma: Option<u32>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    mu_f: Option<f64>,
    /// Comma-separated fiber counts.
    #[arg(long)]
    fibers: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Any other config key, as `key=value`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ExperimentArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::parse(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)?,
            None => ExperimentConfig::for_test(match &self.test {
                Some(t) => t.parse()?,
                None => TestKind::Pull,
            }),
        };
        // a test switch without a file starts from that test's defaults
        if self.config.is_some() {
            if let Some(t) = &self.test {
                let kind: TestKind = t.parse()?;
                if kind != cfg.test {
                    cfg = ExperimentConfig::for_test(kind);
                }
            }
        }
        let mut pairs: Vec<(&str, String)> = Vec::new();
        let flags = [
            ("r_omega", self.r_omega.map(|v| v.to_string())),
            ("r_gamma", self.r_gamma.map(|v| v.to_string())),
            ("beta", self.beta.map(|v| v.to_string())),
            ("mu_f", self.mu_f.map(|v| v.to_string())),
            ("fibers", self.fibers.clone()),
            ("seed", self.seed.map(|v| v.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                pairs.push((k, v));
            }
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::param("set", format!("expected KEY=VALUE, found `{kv}`")))?;
            pairs.push((k.trim(), v.trim().to_string()));
        }
        cfg.apply_overrides(pairs)?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct HalpinTsaiArgs {
    #[arg(long, default_value_t = 70.0)]
    e_f: f64,
    #[arg(long, default_value_t = 3.0)]
    e_m: f64,
    #[arg(long, default_value_t = 0.38)]
    nu_m: f64,
    /// Shape factor `2l/d`.
    #[arg(long, default_value_t = 20.0)]
    aspect: f64,
    #[arg(long, default_value_t = 0.135)]
    beta: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenMode {
    Uniform,
    RandomPlanar,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    mode: GenMode,
    /// Number of fibers; a perfect square for uniform arrays.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    #[arg(long, default_value_t = 0)]
    axis: usize,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    #[arg(long)]
    length: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveOneArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Fiber count to generate; defaults to the first sweep entry.
    #[arg(long)]
    n_fibers: Option<usize>,
    /// Use a network file instead of generating one.
    #[arg(long, conflicts_with = "n_fibers")]
    network: Option<PathBuf>,
    #[arg(long)]
    vtk: Option<PathBuf>,
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io(Path::new("<stdout>"), e)),
    }
}

fn run(args: ExperimentArgs) -> Result<()> {
    let cfg = args.load()?;
    let records = run_experiment(&cfg)?;
    write_output(cfg.out.as_deref(), &csv_string(&records))?;
    let ok: Vec<_> = records.iter().filter(|r| r.error.is_none()).collect();
    if ok.len() >= 2 {
        let e: Vec<f64> = ok.iter().map(|r| r.l2_error).collect();
        let n: Vec<f64> = ok.iter().map(|r| r.n_fibers as f64).collect();
        if let Ok(s) = convergence_slope(&e, &n) {
            eprintln!("least_squares_slope={}", s.least_squares);
        }
    }
    let failed: Vec<_> = records.iter().filter(|r| r.error.is_some()).collect();
    for r in &failed {
        eprintln!("error n_fibers={} {}", r.n_fibers, r.error.as_deref().unwrap_or(""));
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::param("sweep", format!("{} of {} points failed", failed.len(), records.len())))
    }
}

fn halpin(args: HalpinTsaiArgs) -> Result<()> {
    let r = halpin_tsai(args.e_f, args.e_m, args.aspect, args.beta)?;
    let lame = r.isotropic_lame(args.e_m)?;
    let matrix = lame_from_young_poisson(args.e_m, args.nu_m)?;
    let text = format!(
        "eta_l={}\neta_t={}\ne_l={}\ne_t={}\ne_c={}\nmu_c={}\nnu_r={}\nnu_r_minus_nu_m={}\nlambda_eff={}\nmu_eff={}\nlambda_m={}\nmu_m={}\n",
        r.eta_l,
        r.eta_t,
        r.e_l * args.e_m,
        r.e_t * args.e_m,
        r.e_c * args.e_m,
        r.mu_c * args.e_m,
        r.nu_r,
        r.nu_r - args.nu_m,
        lame.lambda,
        lame.mu,
        matrix.lambda,
        matrix.mu,
    );
    write_output(None, &text)
}

fn gen_fibers(args: GenArgs) -> Result<()> {
    let (network, header) = match args.mode {
        GenMode::Uniform => {
            let side = (args.n as f64).sqrt().round() as usize;
            if side * side != args.n {
                return Err(Error::param("n", format!("{} is not a perfect square", args.n)));
            }
            let net = uniform_parallel_fibers(side, args.beta, args.axis, args.margin)?;
            let header = NetworkHeader {
                mode: "uniform".into(),
                ..Default::default()
            };
            (net, header)
        }
        GenMode::RandomPlanar => {
            let mut cfg = ExperimentConfig::for_test(TestKind::RandomPlanar);
            cfg.beta = args.beta;
            let (l, r) = cfg.random_fiber_size(args.n);
            let placed = random_planar_fibers(args.n, args.length.unwrap_or(l), args.radius.unwrap_or(r), args.seed)?;
            if placed.resampled > 0 {
                eprintln!("resampled={}", placed.resampled);
            }
            let header = NetworkHeader {
                mode: "random-planar".into(),
                seed: Some(args.seed),
                rng: Some(RNG_ALGORITHM.into()),
            };
            (placed.network, header)
        }
    };
    let mut buf = Vec::new();
    write_network(&network, &header, &mut buf).map_err(|e| Error::io(Path::new("<buffer>"), e))?;
    eprintln!("volume_ratio={}", network.volume_ratio());
    write_output(args.out.as_deref(), &String::from_utf8_lossy(&buf))
}

fn solve(args: SolveOneArgs) -> Result<()> {
    let cfg = args.experiment.load()?;
    let sol = match &args.network {
        Some(path) => {
            let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
            let (network, _) = read_network(BufReader::new(file))?;
            solve_network(&cfg, &network)?
        }
        None => {
            let n_f = args.n_fibers.or(cfg.fibers.first().copied()).unwrap_or(0);
            solve_one(&cfg, n_f)?.1
        }
    };
    if let Some(path) = &args.vtk {
        write_vtk(path, &sol.mesh, &sol.fibers, &sol.coupled.u, &sol.u_hom, &sol.coupled.w)?;
    }
    let text = format!("{}l2_error={}\n", sol.coupled.stats(), sol.l2_error);
    write_output(cfg.out.as_deref(), &text)
}

fn error_line(kind: &str, message: &str) -> String {
    format!("error kind={kind} message={message:?}")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            eprintln!("{}", error_line("usage", msg.lines().next().unwrap_or("")));
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::HalpinTsai(a) => halpin(a),
        Command::GenFibers(a) => gen_fibers(a),
        Command::SolveOne(a) => solve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_line(e.kind(), &e.to_string()));
            ExitCode::FAILURE
        }
    }
}
