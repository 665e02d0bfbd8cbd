use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use nb_region::countfile::{read_counts, CountFileError};
use nb_region::core::region::{DEFAULT_GRID_SPREAD, DEFAULT_GRID_STEPS};
use nb_region::core::verify::DEFAULT_REPS;
use nb_region::core::{Error, EstimateResult, GridSpec, NbParams, RegionProblem, SampleStats};
use nb_region::format::sig;
use nb_region::render::{render, Format, RenderError};
use nb_region::{parallel, report};

const DEFAULT_LEVELS: &str = "0.5,0.8,0.95";

/// Method-of-moments estimation and joint confidence regions for the
/// negative binomial NB(mu, P), with Monte Carlo checks.
#[derive(Parser)]
#[command(name = "nb-region", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Moment estimates from a count file.
    Estimate(EstimateArgs),
    /// Confidence-region grid as CSV or SVG.
    Region(RegionArgs),
    /// Coverage of the confidence region by simulation.
    Coverage(CoverageArgs),
    /// How often a simulated sample has s^2 <= mean.
    Underdisp(UnderdispArgs),
    /// Per-replicate moment estimates as CSV.
    Scatter(ScatterArgs),
}

#[derive(Args)]
struct EstimateArgs {
    /// Count file; `-` or nothing reads stdin.
    file: Option<PathBuf>,
    /// Emit a JSON object instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RegionArgs {
    /// Count file; `-` reads stdin.
    #[arg(conflicts_with = "estimates")]
    file: Option<PathBuf>,
    /// Reported estimates as MU_HAT,P1_HAT where P1_HAT = P_hat + 1.
    #[arg(long, value_parser = parse_estimates, requires = "n")]
    estimates: Option<(f64, f64)>,
    /// Sample size behind --estimates.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    n: Option<u64>,
    /// Comma-separated confidence levels in (0, 1).
    #[arg(long, default_value = DEFAULT_LEVELS, value_parser = parse_levels)]
    levels: Levels,
    /// MU_MIN,MU_MAX,P_MIN,P_MAX[,MU_STEPS,P_STEPS].
    #[arg(long, value_parser = parse_grid)]
    grid: Option<GridSpec>,
    /// Half-width of the automatic grid in asymptotic sds per log axis.
    #[arg(long, default_value_t = DEFAULT_GRID_SPREAD)]
    spread: f64,
    /// Output file; the summary then goes to stdout instead of stderr.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to the --out extension, else csv.
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
    /// Candidate MU,P to test against every level; repeatable.
    #[arg(long = "check", value_parser = parse_pair)]
    checks: Vec<(f64, f64)>,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long)]
    mu: f64,
    #[arg(long)]
    p: f64,
    /// Sample size per replicate.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    n: u64,
    #[arg(long, default_value_t = DEFAULT_REPS, value_parser = clap::value_parser!(u64).range(1..))]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CoverageArgs {
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long, default_value = DEFAULT_LEVELS, value_parser = parse_levels)]
    levels: Levels,
}

#[derive(Args)]
struct UnderdispArgs {
    #[command(flatten)]
    sim: SimArgs,
}

#[derive(Args)]
struct ScatterArgs {
    #[command(flatten)]
    sim: SimArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Svg,
}

#[derive(Clone)]
struct Levels(Vec<f64>);

fn parse_reals(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{}` is not a number", t.trim())))
        .collect()
}

fn parse_levels(s: &str) -> Result<Levels, String> {
    let levels = parse_reals(s)?;
    if let Some(bad) = levels.iter().find(|&&l| !(l > 0.0 && l < 1.0)) {
        return Err(format!("level {bad} is outside (0, 1)"));
    }
    Ok(Levels(levels))
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    match parse_reals(s)?[..] {
        [a, b] => Ok((a, b)),
        _ => Err("expected two comma-separated numbers".into()),
    }
}

fn parse_estimates(s: &str) -> Result<(f64, f64), String> {
    let (mu_hat, p1_hat) = parse_pair(s)?;
    EstimateResult::from_reported(mu_hat, p1_hat).map_err(|e| e.to_string())?;
    Ok((mu_hat, p1_hat))
}

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let v = parse_reals(s)?;
    let steps = |x: f64| -> Result<usize, String> {
        if x.fract() == 0.0 && x >= 0.0 {
            Ok(x as usize)
        } else {
            Err(format!("grid steps `{x}` must be a whole number"))
        }
    };
    let (mu_steps, p_steps) = match v.len() {
        4 => (DEFAULT_GRID_STEPS, DEFAULT_GRID_STEPS),
        6 => (steps(v[4])?, steps(v[5])?),
        _ => return Err("expected MU_MIN,MU_MAX,P_MIN,P_MAX[,MU_STEPS,P_STEPS]".into()),
    };
    GridSpec::new(v[0], v[1], v[2], v[3], mu_steps, p_steps).map_err(|e| e.to_string())
}

enum Failure {
    Io(String),
    Usage(String),
    Degenerate(String),
    Empty(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Degenerate(_) => 3,
            Failure::Empty(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Io(m) | Failure::Usage(m) | Failure::Degenerate(m) | Failure::Empty(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ZeroMean | Error::ZeroVariance => Failure::Degenerate(e.to_string()),
            Error::GridTooCoarse => Failure::Empty(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<CountFileError> for Failure {
    fn from(e: CountFileError) -> Self {
        match e {
            CountFileError::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<RenderError> for Failure {
    fn from(e: RenderError) -> Self {
        match e {
            RenderError::EmptyGrid => Failure::Empty(e.to_string()),
            RenderError::Io(e) => Failure::Io(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(args) => estimate(args),
        Command::Region(args) => region(args),
        Command::Coverage(args) => coverage(args),
        Command::Underdisp(args) => underdisp(args),
        Command::Scatter(args) => scatter(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("nb-region: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn input_path(file: &Option<PathBuf>) -> &Path {
    file.as_deref().unwrap_or(Path::new("-"))
}

/// Writes to `path`, or to stdout when absent.
fn with_output(path: &Option<PathBuf>, f: impl FnOnce(&mut dyn Write) -> Result<(), Failure>) -> Result<(), Failure> {
    match path {
        Some(path) => {
            let file = File::create(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct EstimateJson {
    n: u64,
    mean: f64,
    s2: f64,
    mu_hat: f64,
    p_hat: f64,
    log_mu_hat: f64,
    log_p1_hat: f64,
    regime: &'static str,
}

fn estimate(args: EstimateArgs) -> Result<(), Failure> {
    let counts = read_counts(input_path(&args.file))?;
    let stats = SampleStats::from_counts(&counts)?;
    let est = stats.mme()?;
    let mut out = io::stdout().lock();
    if args.json {
        let json = EstimateJson {
            n: stats.n(),
            mean: stats.mean(),
            s2: stats.s2(),
            mu_hat: est.mu_hat,
            p_hat: est.p_hat,
            log_mu_hat: est.log_mu_hat,
            log_p1_hat: est.log_p1_hat,
            regime: est.regime.as_str(),
        };
        serde_json::to_writer(&mut out, &json).map_err(|e| Failure::Io(e.to_string()))?;
        writeln!(out)?;
    } else {
        let rows = [
            ("n", stats.n().to_string()),
            ("mean", sig(stats.mean(), 9)),
            ("s2", sig(stats.s2(), 9)),
            ("mu_hat", sig(est.mu_hat, 9)),
            ("p_hat", sig(est.p_hat, 9)),
            ("log_mu_hat", sig(est.log_mu_hat, 9)),
            ("log_p1_hat", sig(est.log_p1_hat, 9)),
            ("regime", est.regime.as_str().to_string()),
        ];
        for (k, v) in rows {
            writeln!(out, "{k:<12}{v}")?;
        }
    }
    Ok(())
}

fn region(args: RegionArgs) -> Result<(), Failure> {
    let (est, n) = match args.estimates {
        Some((mu_hat, p1_hat)) => (EstimateResult::from_reported(mu_hat, p1_hat)?, args.n.expect("required by clap")),
        None => {
            let counts = read_counts(input_path(&args.file))?;
            let stats = SampleStats::from_counts(&counts)?;
            (stats.mme()?, stats.n())
        }
    };
    let problem = RegionProblem::from_estimate(&est, n, &args.levels.0)?;
    let spec = match args.grid {
        Some(spec) => spec,
        None => {
            // the delta-method sds need a valid P; clamp under-dispersed guesses
            let guess = NbParams::new(est.mu_hat, est.p_hat.max(0.0))?;
            problem.default_grid(&guess, args.spread)?
        }
    };
    let grid = parallel::contour_grid(&problem, spec);

    let format = match (args.format, &args.out) {
        (Some(OutFormat::Svg), _) => Format::Svg,
        (Some(OutFormat::Csv), _) => Format::Csv,
        (None, Some(path)) if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("svg")) => Format::Svg,
        (None, _) => Format::Csv,
    };
    let mut marks = vec![problem.point_estimate()];
    marks.extend_from_slice(&args.checks);
    with_output(&args.out, |w| Ok(render(&grid, format, &marks, w)?))?;

    let mut summary = String::new();
    for level in &grid.levels {
        let s = level.split;
        summary += &format!(
            "level={} poisson_points={} nb_points={} poisson_area={} nb_area={} boundaries={}\n",
            sig(level.level.value(), 6),
            s.poisson_points,
            s.nb_points,
            sig(s.poisson_area, 6),
            sig(s.nb_area, 6),
            level.boundaries.len()
        );
    }
    for &(mu, p) in &args.checks {
        let stat = problem.statistic(mu, p).ok();
        for level in problem.levels() {
            let inside = stat.is_some_and(|s| s <= level.critical_value());
            summary += &format!(
                "check mu={} p={} level={} inside={} stat={}\n",
                sig(mu, 9),
                sig(p, 9),
                sig(level.value(), 6),
                inside,
                stat.map_or("nan".to_string(), |s| sig(s, 9))
            );
        }
    }
    if args.out.is_some() {
        io::stdout().lock().write_all(summary.as_bytes())?;
    } else {
        io::stderr().lock().write_all(summary.as_bytes())?;
    }
    Ok(())
}

fn sim_params(sim: &SimArgs) -> Result<NbParams, Failure> {
    Ok(NbParams::new(sim.mu, sim.p)?)
}

fn coverage(args: CoverageArgs) -> Result<(), Failure> {
    let sim = &args.sim;
    let report = parallel::coverage(sim_params(sim)?, sim.n, &args.levels.0, sim.reps, sim.seed)?;
    with_output(&sim.out, |w| Ok(report::write_coverage(&[report], w)?))
}

fn underdisp(args: UnderdispArgs) -> Result<(), Failure> {
    let sim = &args.sim;
    let report = parallel::underdispersion(sim_params(sim)?, sim.n, sim.reps, sim.seed)?;
    with_output(&sim.out, |w| Ok(report::write_underdispersion(&[report], w)?))
}

fn scatter(args: ScatterArgs) -> Result<(), Failure> {
    let sim = &args.sim;
    let rows = parallel::estimates(sim_params(sim)?, sim.n as usize, sim.reps, sim.seed);
    with_output(&sim.out, |w| Ok(report::write_scatter(&rows, w)?))
}
