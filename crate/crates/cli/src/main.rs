use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crankback::analytic::{
    approx_profile, return_profile_grid, return_profile_quadrature, DEFAULT_GRID_POINTS, DEFAULT_MAX_DEPTH,
    DEFAULT_QUADRATURE_TOL,
};
use crankback::io::{load_scenario, render, Format, Report, SimSettings};
use crankback::planner::{optimize_ptr, waste_report, DEFAULT_TOL};
use crankback::reproduce::reproduce;
use crankback::sim::simulate_profile;
use crankback::{Error, Policy, ReturnProfile, Scenario, SimConfig};

const SEED_ENV: &str = "CRANKBACK_SEED";
/// Trials per table for `reproduce` unless overridden.
const REPRODUCE_TRIALS: u64 = 1_000_000;

#[derive(Parser)]
#[command(
    name = "crankback",
    version,
    about = "Crankback routing analysis under a hard delay budget"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Table,
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Table => Format::Table,
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Per-node first-return probabilities from an analytic engine.
    Analyze {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Monte Carlo estimate of the first-return profile.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, value_enum)]
        policy: Option<PolicyArg>,
        /// Residual-budget threshold for the rest-time policy.
        #[arg(long)]
        t_tr: Option<f64>,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Finds p_tr whose success probability meets a target.
    Optimize {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Required success probability.
        #[arg(long)]
        target: f64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Accept the nearest endpoint when the target is out of reach.
        #[arg(long)]
        clip: bool,
    },
    /// Expected wasted travel under retries.
    Waste {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_enum, default_value_t = ProfileSource::Analytic)]
        profile_source: ProfileSource,
        #[command(flatten)]
        engine: EngineArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Evaluates every reference table against the analytic engines and the simulator.
    Reproduce {
        #[command(flatten)]
        sim: SimArgs,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// TOML scenario file; inline flags override its values.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Number of hops (decisions happen at nodes 1..n-1).
    #[arg(long)]
    n: Option<usize>,
    /// Mean hop delay M.
    #[arg(long)]
    hop_mean: Option<f64>,
    /// Hop delay variance V.
    #[arg(long)]
    hop_var: Option<f64>,
    /// End-to-end delay budget T.
    #[arg(long)]
    deadline: Option<f64>,
    /// Turn-back probability threshold.
    #[arg(long)]
    p_tr: Option<f64>,
    /// Per-hop travel cost for waste figures; defaults to the hop mean.
    #[arg(long)]
    hop_distance: Option<f64>,
}

#[derive(Args)]
struct EngineArgs {
    /// Analytic engine [default: grid].
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Grid method only.
    #[arg(long)]
    grid_points: Option<usize>,
    /// Quadrature method only: nodes computed (1..=n-1).
    #[arg(long)]
    max_depth: Option<usize>,
    /// Quadrature method only: absolute tolerance.
    #[arg(long)]
    quad_tol: Option<f64>,
}

#[derive(Args)]
struct SimArgs {
    /// Monte Carlo trials [default: 1000000].
    #[arg(long)]
    trials: Option<u64>,
    /// Defaults to the scenario file, then $CRANKBACK_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Grid,
    Quadrature,
    Approx,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    Quantile,
    #[value(alias = "rest_time")]
    RestTime,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProfileSource {
    Analytic,
    Simulated,
}

enum Failure {
    Usage(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Compute(e.to_string())
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

type Outcome<T> = std::result::Result<T, Failure>;

impl ScenarioArgs {
    /// File values overlaid with inline flags. `p_tr_fallback` fills a
    /// missing `p_tr` for commands that ignore it.
    fn resolve(&self, p_tr_fallback: Option<f64>) -> Outcome<(Scenario, SimSettings)> {
        let loaded = self.scenario.as_ref().map(load_scenario).transpose()?;
        let base = loaded.as_ref().map(|l| &l.scenario);
        let missing = |flag: &str| usage(format!("missing --{flag} (or a --scenario file)"));
        let n = self.n.or(base.map(Scenario::n)).ok_or_else(|| missing("n"))?;
        let hop_mean = self
            .hop_mean
            .or(base.map(Scenario::hop_mean))
            .ok_or_else(|| missing("hop-mean"))?;
        let hop_var = self
            .hop_var
            .or(base.map(Scenario::hop_var))
            .ok_or_else(|| missing("hop-var"))?;
        let deadline = self
            .deadline
            .or(base.map(Scenario::deadline))
            .ok_or_else(|| missing("deadline"))?;
        let p_tr = self
            .p_tr
            .or(base.map(Scenario::p_tr))
            .or(p_tr_fallback)
            .ok_or_else(|| missing("p-tr"))?;
        let mut s = Scenario::new(n, hop_mean, hop_var, deadline, p_tr)?;
        if let Some(d) = self.hop_distance.or(base.map(Scenario::hop_distance)) {
            s = s.with_hop_distance(d)?;
        }
        Ok((s, loaded.map(|l| l.sim).unwrap_or_default()))
    }
}

impl EngineArgs {
    fn check(&self) -> Outcome<MethodArg> {
        let method = self.method.unwrap_or(MethodArg::Grid);
        if method != MethodArg::Grid && self.grid_points.is_some() {
            return Err(usage("--grid-points only applies to --method grid"));
        }
        if method != MethodArg::Quadrature && (self.max_depth.is_some() || self.quad_tol.is_some()) {
            return Err(usage("--max-depth and --quad-tol only apply to --method quadrature"));
        }
        Ok(method)
    }

    fn profile(&self, method: MethodArg, s: &Scenario, full_depth: bool) -> Outcome<ReturnProfile> {
        Ok(match method {
            MethodArg::Grid => return_profile_grid(s, self.grid_points.unwrap_or(DEFAULT_GRID_POINTS))?,
            MethodArg::Approx => approx_profile(s),
            MethodArg::Quadrature => {
                let default_depth = if full_depth {
                    s.decision_nodes()
                } else {
                    DEFAULT_MAX_DEPTH.min(s.decision_nodes())
                };
                let depth = self.max_depth.unwrap_or(default_depth);
                return_profile_quadrature(s, depth, self.quad_tol.unwrap_or(DEFAULT_QUADRATURE_TOL))?
            }
        })
    }
}

impl SimArgs {
    fn given(&self) -> bool {
        self.trials.is_some() || self.seed.is_some()
    }

    /// Seed precedence: flag, scenario file, `$CRANKBACK_SEED`, 0.
    fn seed(&self, file: &SimSettings) -> Outcome<u64> {
        if let Some(seed) = self.seed.or(file.seed) {
            return Ok(seed);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| usage(format!("{SEED_ENV} must be an unsigned integer (got {v:?})"))),
            Err(_) => Ok(0),
        }
    }

    fn config(&self, file: &SimSettings) -> Outcome<SimConfig> {
        let mut cfg = file.to_config();
        cfg.trials = self.trials.unwrap_or(cfg.trials);
        cfg.seed = self.seed(file)?;
        Ok(cfg)
    }
}

fn warn_all(profile: &ReturnProfile) {
    for w in &profile.diagnostics.warnings {
        eprintln!("warning: {w}");
    }
}

fn run(cli: Cli) -> Outcome<Report> {
    match cli.command {
        Command::Analyze { scenario, engine } => {
            let method = engine.check()?;
            let (s, _) = scenario.resolve(None)?;
            let profile = engine.profile(method, &s, false)?;
            warn_all(&profile);
            Ok(Report::Profile(profile))
        }
        Command::Simulate {
            scenario,
            sim,
            policy,
            t_tr,
            workers,
        } => {
            if policy == Some(PolicyArg::Quantile) && t_tr.is_some() {
                return Err(usage("--t-tr only applies to --policy rest-time"));
            }
            if workers == Some(0) {
                return Err(usage("--workers must be ≥ 1"));
            }
            let (s, file) = scenario.resolve(None)?;
            let mut cfg = sim.config(&file)?;
            let file_t_tr = match file.policy {
                Some(Policy::RestTime { t_tr }) => Some(t_tr),
                _ => None,
            };
            let rest_time = match policy {
                Some(PolicyArg::RestTime) => true,
                Some(PolicyArg::Quantile) => false,
                None => t_tr.is_some() || file_t_tr.is_some(),
            };
            cfg.policy = if rest_time {
                let t_tr = t_tr
                    .or(file_t_tr)
                    .ok_or_else(|| usage("--policy rest-time needs --t-tr"))?;
                Policy::RestTime { t_tr }
            } else {
                Policy::Quantile
            };
            cfg.workers = workers;
            cfg.validate(&s)?;
            Ok(Report::Simulation(simulate_profile(&s, &cfg)?))
        }
        Command::Optimize {
            scenario,
            target,
            tol,
            clip,
        } => {
            if !(target > 0.0 && target < 1.0) {
                return Err(usage(format!("--target must lie strictly inside (0,1) (got {target})")));
            }
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(usage(format!("--tol must be > 0 (got {tol})")));
            }
            // The scenario's own p_tr is what is being solved for.
            let (s, _) = scenario.resolve(Some(0.5))?;
            let outcome = optimize_ptr(&s, target, tol)?;
            if outcome.unattainable {
                let msg = format!(
                    "target {target} is out of reach: nearest endpoint p_tr = {} gives {}",
                    outcome.p_tr, outcome.achieved
                );
                if !clip {
                    return Err(Failure::Compute(format!("{msg} (pass --clip to accept it)")));
                }
                eprintln!("warning: {msg}");
            }
            Ok(Report::Optimization(outcome))
        }
        Command::Waste {
            scenario,
            profile_source,
            engine,
            sim,
        } => {
            let method = engine.check()?;
            match profile_source {
                ProfileSource::Analytic if sim.given() => {
                    return Err(usage("--trials and --seed need --profile-source simulated"))
                }
                ProfileSource::Simulated if engine.method.is_some() => {
                    return Err(usage("--method needs --profile-source analytic"))
                }
                _ => {}
            }
            let (s, file) = scenario.resolve(None)?;
            let profile = match profile_source {
                ProfileSource::Analytic => engine.profile(method, &s, true)?,
                ProfileSource::Simulated => {
                    let mut cfg = sim.config(&file)?;
                    cfg.policy = Policy::Quantile;
                    cfg.validate(&s)?;
                    simulate_profile(&s, &cfg)?.profile
                }
            };
            warn_all(&profile);
            Ok(Report::Waste(waste_report(&profile, s.hop_distance(), s.n())?))
        }
        Command::Reproduce { sim } => {
            let trials = sim.trials.unwrap_or(REPRODUCE_TRIALS);
            if trials == 0 {
                return Err(usage("--trials must be ≥ 1"));
            }
            let seed = sim.seed(&SimSettings::default())?;
            Ok(Report::Reproduction(reproduce(trials, seed)?))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = Format::from(cli.format);
    let report = match run(cli) {
        Ok(r) => r,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let mut out = std::io::stdout().lock();
    if let Err(e) = render(&report, format, &mut out).and_then(|_| out.flush()) {
        eprintln!("error: writing output: {e}");
        return ExitCode::from(1);
    }
    match report {
        Report::Reproduction(r) if !r.all_pass => {
            eprintln!("error: some reference values were not reproduced");
            ExitCode::from(1)
        }
        _ => ExitCode::SUCCESS,
    }
}
