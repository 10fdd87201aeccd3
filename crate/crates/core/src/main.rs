use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use szego_lab::config::{Config, ConfigError};
use szego_lab::counterexample::run_counterexample;
use szego_lab::radialnd::{mu1_ball, solve_radial, spectral_gap, RadialProblem};
use szego_lab::rearrange::{
    hardy_littlewood_check, random_cell_pair, rayleigh_bound_with, star_rearrangement, AnnularSet, CellFunction,
};
use szego_lab::sl1d::{solve_dirichlet_inverse_weight, solve_flat_dirichlet, solve_neumann, Problem};
use szego_lab::sweep::{check_sweep, sweep_mu1, symmetric_halfwidth, upper_limit, SweepConfig, SweepSummary};
use szego_lab::weights::Monotonicity;
use szego_lab::Error;

const THREADS_VAR: &str = "SZEGO_LAB_THREADS";

#[derive(Parser)]
#[command(name = "szego-lab", version, about = "Weighted Neumann eigenvalue laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON scenario file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid resolution (number of intervals)
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Slide an interval of fixed weighted length and check mu1 monotonicity
    Sweep {
        #[command(flatten)]
        common: Common,
        /// gaussian | anti_gaussian | constant
        #[arg(long)]
        weight: Option<String>,
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        a_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        a_max: Option<f64>,
        /// Write the JSON summary here
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Eigenpairs of one of the 1D problems on an interval
    #[command(name = "spectrum-1d")]
    Spectrum1d {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        weight: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<f64>,
        #[arg(long)]
        modes: Option<usize>,
        /// neumann | dirichlet_inverse_weight | flat_dirichlet
        #[arg(long)]
        problem: Option<String>,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Radial spectrum on a ball and the nu1 < tau1 gap
    Radial {
        #[command(flatten)]
        common: Common,
        /// radial_square | radial_zero
        #[arg(long)]
        weight: Option<String>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        radius: Option<f64>,
        /// Angular index of the exported spectrum
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        modes: Option<usize>,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Star rearrangement of a cell function and the Rayleigh bound of its support
    Rearrange {
        #[command(flatten)]
        common: Common,
    },
    /// Full counterexample chain on the rectangle (c, d) x (-c, c)
    Counterexample {
        #[command(flatten)]
        common: Common,
    },
    /// Hardy-Littlewood chain for two cell functions, or for random pairs
    #[command(name = "hl-check")]
    HlCheck {
        #[command(flatten)]
        common: Common,
        /// Number of random pairs instead of a config
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Exit 1: a verified property failed. Exit 2: bad input.
enum Failure {
    Verification(String),
    Input(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn is_input_error(e: &Error) -> bool {
    match e {
        Error::InvalidArgument(_)
        | Error::MassOutOfRange { .. }
        | Error::BudgetUnattainable { .. }
        | Error::WeightInadmissible { .. }
        | Error::IncompatibleSupports(_)
        | Error::InsufficientResolution { .. } => true,
        Error::SweepPoint { source, .. } | Error::Step { source, .. } => is_input_error(source),
        _ => false,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if is_input_error(&e) {
            Failure::Input(e.to_string())
        } else {
            Failure::Verification(e.to_string())
        }
    }
}

fn load(common: &Common, scenario: &str) -> Result<Config, Failure> {
    let mut cfg = match &common.config {
        Some(path) => Config::from_path(path)?,
        None => Config::default(),
    };
    cfg.expect_scenario(scenario)?;
    if common.n.is_some() {
        cfg.resolution = common.n;
    }
    if common.out.is_some() {
        cfg.out = common.out.clone();
    }
    Ok(cfg)
}

fn set_weight(cfg: &mut Config, kind: Option<String>) {
    if let Some(kind) = kind {
        let params = cfg.weight.take().map(|w| w.params).unwrap_or_default();
        cfg.weight = Some(szego_lab::config::WeightSpec { kind, params });
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Input(format!("cannot write to stdout: {e}"))),
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn verdict(ok: bool, what: &str) -> Result<(), Failure> {
    if ok {
        eprintln!("{what}: ok");
        Ok(())
    } else {
        Err(Failure::Verification(format!("{what}: verification failed")))
    }
}

fn run_sweep(
    common: Common,
    weight: Option<String>,
    budget: Option<f64>,
    steps: Option<usize>,
    a_min: Option<f64>,
    a_max: Option<f64>,
    summary: Option<PathBuf>,
) -> Result<(), Failure> {
    let mut cfg = load(&common, "sweep")?;
    set_weight(&mut cfg, weight);
    cfg.budget = budget.or(cfg.budget).or(Some(1.5));
    let w = cfg.weight_1d("gaussian")?;
    let d = cfg.budget()?;
    let abar = symmetric_halfwidth(&w, d)?;
    let a_plus = upper_limit(&w, d)?;
    let range = cfg.range;
    let a_min = a_min.or(range.map(|r| r.a_min)).unwrap_or(-2.0 * abar);
    let a_max = a_max
        .or(range.map(|r| r.a_max))
        .unwrap_or_else(|| (a_plus - 0.05).min(0.0));
    let sc = SweepConfig {
        weight: w,
        d,
        a_min,
        a_max,
        steps: steps.or(cfg.steps).unwrap_or(21),
        n: cfg.resolution(4000),
    };
    let result = sweep_mu1(&sc)?;
    emit(cfg.out.as_deref(), &result.to_csv())?;
    let s = SweepSummary::new(&result);
    if let Some(path) = summary {
        emit(Some(&path), &json(&s))?;
    }
    let rep = check_sweep(&result);
    let strict = rep.strict_ok || rep.monotonicity == Monotonicity::Constant;
    verdict(rep.symmetry_ok && rep.sign_ok && strict, "sweep")
}

fn run_spectrum(
    common: Common,
    weight: Option<String>,
    a: Option<f64>,
    b: Option<f64>,
    modes: Option<usize>,
    problem: Option<String>,
    summary: Option<PathBuf>,
) -> Result<(), Failure> {
    let mut cfg = load(&common, "spectrum-1d")?;
    set_weight(&mut cfg, weight);
    if problem.is_some() {
        cfg.problem = problem;
    }
    if let (Some(a), Some(b)) = (a, b) {
        cfg.interval = Some(szego_lab::config::IntervalSpec { a, b });
    }
    let w = cfg.weight_1d("gaussian")?;
    let iv = cfg.interval()?;
    let k = modes.or(cfg.modes).unwrap_or(3);
    let n = cfg.resolution(2000);
    let spec = match cfg.problem()? {
        Problem::Neumann => solve_neumann(&w, iv.a, iv.b, k, n)?,
        Problem::DirichletInverseWeight => solve_dirichlet_inverse_weight(&w, iv.a, iv.b, k, n)?,
        Problem::FlatDirichlet => solve_flat_dirichlet(&w, iv.a, iv.b, k, n)?,
    };
    emit(cfg.out.as_deref(), &spec.to_csv())?;
    if let Some(path) = summary {
        #[derive(Serialize)]
        struct Summary<'a> {
            problem: Problem,
            a: f64,
            b: f64,
            n: usize,
            eigenvalues: &'a [f64],
        }
        let s = Summary {
            problem: spec.problem,
            a: iv.a,
            b: iv.b,
            n,
            eigenvalues: &spec.eigenvalues,
        };
        emit(Some(&path), &json(&s))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_radial(
    common: Common,
    weight: Option<String>,
    dim: Option<usize>,
    radius: Option<f64>,
    k: Option<usize>,
    modes: Option<usize>,
    summary: Option<PathBuf>,
) -> Result<(), Failure> {
    let mut cfg = load(&common, "radial")?;
    set_weight(&mut cfg, weight);
    cfg.dim = dim.or(cfg.dim);
    let rw = cfg.radial_weight("radial_square")?;
    let r = radius.or(cfg.radius).unwrap_or(1.0);
    let n = cfg.resolution(2000);
    let k = k.or(cfg.k).unwrap_or(1);
    let count = modes.or(cfg.modes).unwrap_or(3);
    let spec = solve_radial(&RadialProblem::new(rw.clone(), r, k, n)?, count)?;
    emit(cfg.out.as_deref(), &spec.to_csv())?;
    let gap = spectral_gap(&rw, r, n)?;
    let mu1 = mu1_ball(&rw, r, n)?;
    if let Some(path) = summary {
        #[derive(Serialize)]
        struct Summary<'a> {
            dim: usize,
            k: usize,
            eigenvalues: &'a [f64],
            gap: szego_lab::radialnd::GapReport,
            mu1_ball: f64,
        }
        let s = Summary {
            dim: rw.dim(),
            k,
            eigenvalues: &spec.eigenvalues,
            gap,
            mu1_ball: mu1,
        };
        emit(Some(&path), &json(&s))?;
    }
    verdict(gap.gap_ok, "radial gap")
}

fn run_rearrange(common: Common) -> Result<(), Failure> {
    let cfg = load(&common, "rearrange")?;
    let rw = cfg.radial_weight("radial_square")?;
    let cells = cfg.cells()?;
    let omega = AnnularSet::from_cells(rw.dim(), cells)?;
    let star = if cells.iter().all(|c| c.value.is_some()) {
        Some(star_rearrangement(&CellFunction::from_cells(rw.dim(), cells)?, &rw)?.to_cells())
    } else {
        None
    };
    let bound = rayleigh_bound_with(&omega, &rw, cfg.resolution(szego_lab::rearrange::PROFILE_INTERVALS))?;
    #[derive(Serialize)]
    struct Report {
        star: Option<Vec<szego_lab::rearrange::CellSpec>>,
        bound: szego_lab::rearrange::RayleighBoundReport,
    }
    emit(cfg.out.as_deref(), &json(&Report { star, bound }))?;
    verdict(bound.ok(), "rayleigh bound")
}

fn run_counterexample_cmd(common: Common) -> Result<(), Failure> {
    let cfg = load(&common, "counterexample")?;
    let report = run_counterexample(cfg.resolution(4096))?;
    emit(cfg.out.as_deref(), &json(&report))?;
    verdict(report.verdict, "counterexample")
}

fn run_hl(common: Common, random: Option<usize>, seed: u64) -> Result<(), Failure> {
    let cfg = load(&common, "hl-check")?;
    let rw = cfg.radial_weight("radial_square")?;
    let reports = match random {
        Some(count) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let (u, v) = random_cell_pair(&mut rng, rw.dim(), 10, 2.0)?;
                out.push(hardy_littlewood_check(&u, &v, &rw)?);
            }
            out
        }
        None => {
            let u = CellFunction::from_cells(rw.dim(), cfg.cells()?)?;
            let v = CellFunction::from_cells(rw.dim(), cfg.partner()?)?;
            vec![hardy_littlewood_check(&u, &v, &rw)?]
        }
    };
    emit(cfg.out.as_deref(), &json(&reports))?;
    verdict(reports.iter().all(|r| r.ok), "hardy-littlewood")
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::Input(format!("{THREADS_VAR} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Input(format!("cannot size thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Sweep {
            common,
            weight,
            budget,
            steps,
            a_min,
            a_max,
            summary,
        } => run_sweep(common, weight, budget, steps, a_min, a_max, summary),
        Command::Spectrum1d {
            common,
            weight,
            a,
            b,
            modes,
            problem,
            summary,
        } => run_spectrum(common, weight, a, b, modes, problem, summary),
        Command::Radial {
            common,
            weight,
            dim,
            radius,
            k,
            modes,
            summary,
        } => run_radial(common, weight, dim, radius, k, modes, summary),
        Command::Rearrange { common } => run_rearrange(common),
        Command::Counterexample { common } => run_counterexample_cmd(common),
        Command::HlCheck { common, random, seed } => run_hl(common, random, seed),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
