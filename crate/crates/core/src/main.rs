use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use robust_diff::error::Error;
use robust_diff::high_gain::{
    self, build_error_system, check_hurwitz, compute_peaking_constants_with, PeakingOptions,
    DEFAULT_MAX_HORIZON, DEFAULT_QUAD_TOLERANCE, LARGE_EPS_WARNING,
};
use robust_diff::plot::render_svg;
use robust_diff::scenario::{
    self, builtin_scenarios, resolve_scenario, DifferentiatorConfig, Scenario,
};
use robust_diff::sliding_mode::{tune_super_twisting, DEFAULT_MU1, DEFAULT_MU2};

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_BOUND_VIOLATED: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "robust-diff",
    version,
    about = "Estimate derivatives of noisy signals with super-twisting and high-gain observers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the bundled scenarios.
    List,
    /// Run a scenario and write its trace, report and optional plot.
    Run(RunArgs),
    /// Compute differentiator parameters.
    #[command(subcommand)]
    Tune(TuneCommand),
    /// Compute the peaking constants Upsilon, Phi, P, Q.
    Constants(ConstantsArgs),
    /// Run a high-gain scenario over a grid of eps values.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct ScenarioOverrides {
    /// Step size [s].
    #[arg(long)]
    dt: Option<f64>,
    /// Simulated time [s].
    #[arg(long)]
    horizon: Option<f64>,
    /// Fraction of the horizon discarded before steady-state statistics.
    #[arg(long)]
    settle_fraction: Option<f64>,
    /// Quadrature tolerance for the high-gain bound.
    #[arg(long)]
    quad_tolerance: Option<f64>,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Bundled scenario name or path to a scenario file.
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Also write an SVG plot.
    #[arg(long)]
    plot: bool,
    #[command(flatten)]
    overrides: ScenarioOverrides,
}

#[derive(Subcommand, Debug)]
enum TuneCommand {
    /// Super-twisting gains from the Lipschitz constant.
    St(TuneStArgs),
    /// High-gain observer: Hurwitz check, P, Q and the optimal eps.
    Hg(TuneHgArgs),
}

#[derive(Args, Debug)]
struct TuneStArgs {
    /// Lipschitz constant of the derivative.
    #[arg(long = "L", alias = "lipschitz")]
    lipschitz: Option<f64>,
    #[arg(long)]
    mu1: Option<f64>,
    #[arg(long)]
    mu2: Option<f64>,
    /// Take defaults from a scenario's signal bounds.
    #[arg(long)]
    scenario: Option<String>,
}

#[derive(Args, Debug)]
struct TuneHgArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha2: Option<f64>,
    /// Bound on the second derivative of the base signal.
    #[arg(long = "M", alias = "second-deriv-bound")]
    second_deriv: Option<f64>,
    /// Bound on the measurement noise.
    #[arg(long)]
    noise_bound: Option<f64>,
    /// A chosen eps; required when the measurement is noise-free.
    #[arg(long)]
    eps_gain: Option<f64>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long, default_value_t = DEFAULT_QUAD_TOLERANCE)]
    quad_tolerance: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_HORIZON)]
    max_horizon: f64,
}

#[derive(Args, Debug)]
struct ConstantsArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha2: Option<f64>,
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long, default_value_t = DEFAULT_QUAD_TOLERANCE)]
    quad_tolerance: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_HORIZON)]
    max_horizon: f64,
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    scenario: String,
    /// Comma-separated eps values; defaults to eps* x {1/4, 1/2, 1, 2, 4}.
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[command(flatten)]
    overrides: ScenarioOverrides,
}

enum Failure {
    Usage(String),
    Numerical(String),
    BoundViolated,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let numerical = match &e {
            Error::Divergence { .. } | Error::Quadrature { .. } => true,
            Error::Sweep { source, .. } => {
                matches!(
                    **source,
                    Error::Divergence { .. } | Error::Quadrature { .. }
                )
            }
            _ => false,
        };
        if numerical {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    let result = match cli.command {
        Command::List => cmd_list(),
        Command::Run(args) => cmd_run(args),
        Command::Tune(TuneCommand::St(args)) => cmd_tune_st(args),
        Command::Tune(TuneCommand::Hg(args)) => cmd_tune_hg(args),
        Command::Constants(args) => cmd_constants(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(Failure::BoundViolated) => ExitCode::from(EXIT_BOUND_VIOLATED),
    }
}

fn cmd_list() -> CmdResult {
    for s in builtin_scenarios() {
        println!("{:<6}  {}", s.name, s.description);
    }
    Ok(())
}

fn apply_overrides(mut s: Scenario, o: &ScenarioOverrides) -> Result<Scenario, Error> {
    if let Some(dt) = o.dt {
        s = s.with_dt(dt)?;
    }
    if let Some(h) = o.horizon {
        s = s.with_horizon(h)?;
    }
    if let Some(f) = o.settle_fraction {
        s = s.with_settle_fraction(f)?;
    }
    if let (Some(tol), DifferentiatorConfig::HighGain { quad_tolerance, .. }) =
        (o.quad_tolerance, &mut s.differentiator)
    {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "quad_tolerance",
                reason: format!("must be > 0, got {tol}"),
            });
        }
        *quad_tolerance = tol;
    }
    Ok(s)
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn cmd_run(args: RunArgs) -> CmdResult {
    let scenario = apply_overrides(resolve_scenario(&args.scenario)?, &args.overrides)?;
    let trace = scenario::run(&scenario)?;
    let report = scenario::evaluate(&trace, &scenario)?;

    fs::create_dir_all(&args.out_dir)?;
    let stem = file_stem(&scenario.name);
    let csv_path = args.out_dir.join(format!("{stem}.csv"));
    let file = std::io::BufWriter::new(fs::File::create(&csv_path)?);
    trace.write_csv(file)?;
    let text = report.to_text();
    fs::write(args.out_dir.join(format!("{stem}.report.txt")), &text)?;
    if args.plot {
        let title = format!("{}: {}", scenario.name, scenario.description);
        fs::write(
            args.out_dir.join(format!("{stem}.svg")),
            render_svg(&trace, &title),
        )?;
    }

    print!("{text}");
    if report.passed() {
        Ok(())
    } else {
        eprintln!(
            "bound violated: steady sup error {} > {}",
            report.steady_sup_error,
            report.theoretical_bound.unwrap_or(f64::NAN)
        );
        Err(Failure::BoundViolated)
    }
}

fn load_optional(selector: Option<&str>) -> Result<Option<Scenario>, Error> {
    selector.map(resolve_scenario).transpose()
}

fn cmd_tune_st(args: TuneStArgs) -> CmdResult {
    let from_file = load_optional(args.scenario.as_deref())?;
    let (mut l, mut mu1, mut mu2) = (None, DEFAULT_MU1, DEFAULT_MU2);
    if let Some(s) = &from_file {
        l = Some(s.signal.lipschitz());
        if let DifferentiatorConfig::SuperTwisting(g) = &s.differentiator {
            if let Some(m) = g.multipliers {
                mu1 = m.mu1;
                mu2 = m.mu2;
            }
        }
    }
    let l = args
        .lipschitz
        .or(l)
        .ok_or_else(|| Failure::Usage("tune st needs --L (or --scenario)".into()))?;
    let gains = tune_super_twisting(l, args.mu1.unwrap_or(mu1), args.mu2.unwrap_or(mu2))?;
    if l == 0.0 {
        eprintln!("warning: L must be positive for convergence guarantees; gains are zero");
    }
    let m = gains.multipliers.expect("tuned gains carry multipliers");
    println!("L: {l}");
    println!("mu1: {}", m.mu1);
    println!("mu2: {}", m.mu2);
    println!("lambda1: {:.6}", gains.lambda1);
    println!("lambda2: {:.6}", gains.lambda2);
    Ok(())
}

fn cmd_tune_hg(args: TuneHgArgs) -> CmdResult {
    let from_file = load_optional(args.scenario.as_deref())?;
    let mut defaults = (None, None, None, None, None, 0.0);
    if let Some(s) = &from_file {
        defaults.2 = Some(s.signal.second_deriv_bound());
        defaults.3 = Some(s.signal.noise_bound());
        if let Some(p) = s.high_gain_params() {
            defaults = (
                Some(p.alpha1),
                Some(p.alpha2),
                defaults.2,
                defaults.3,
                Some(p.eps_gain),
                p.c1,
            );
        }
    }
    let alpha1 = args
        .alpha1
        .or(defaults.0)
        .ok_or_else(|| Failure::Usage("tune hg needs --alpha1".into()))?;
    let alpha2 = args
        .alpha2
        .or(defaults.1)
        .ok_or_else(|| Failure::Usage("tune hg needs --alpha2".into()))?;
    let m = args.second_deriv.or(defaults.2);
    let noise = args.noise_bound.or(defaults.3).unwrap_or(0.0);
    let c1 = args.c1.unwrap_or(defaults.5);

    println!("alpha1: {alpha1}");
    println!("alpha2: {alpha2}");
    let hurwitz = check_hurwitz(alpha1, alpha2);
    println!("hurwitz: {hurwitz}");
    let sys = build_error_system(alpha1, alpha2)?;
    let consts = compute_peaking_constants_with(
        &sys,
        PeakingOptions {
            tolerance: args.quad_tolerance,
            max_horizon: args.max_horizon,
        },
    )?;
    println!("P: {:.6}", consts.p_const);
    println!("Q: {:.6}", consts.q_const);
    println!("upsilon: {:.6}", consts.upsilon);

    if noise > 0.0 {
        let m = m.ok_or_else(|| Failure::Usage("noisy tuning needs --M".into()))?;
        let eps_star = high_gain::optimal_eps_gain(consts.p_const, consts.q_const, m, noise)?;
        let eta =
            high_gain::ultimate_bound(c1, eps_star, consts.p_const, consts.q_const, m, noise)?;
        println!("M: {m}");
        println!("noise_bound: {noise}");
        println!("eps_star: {eps_star:.6}");
        println!("eta_at_eps_star: {eta:.6}");
        if let Some(eps) = args.eps_gain {
            let at = high_gain::ultimate_bound(c1, eps, consts.p_const, consts.q_const, m, noise)?;
            println!("eps_gain: {eps}");
            println!("eta_at_eps_gain: {at:.6}");
        }
    } else {
        let eps = args.eps_gain.or(defaults.4).ok_or_else(|| {
            Failure::Usage("noise-free tuning needs a chosen small --eps-gain".into())
        })?;
        let params = high_gain::HgParams::with_slack(alpha1, alpha2, eps, c1)?;
        println!("eps_gain: {eps}");
        if params.eps_is_large() {
            eprintln!("warning: eps = {eps} is above {LARGE_EPS_WARNING}; the gain is not high");
        }
        if params.exceeds_stability_limit(1e-4) {
            eprintln!(
                "warning: explicit stepping needs dt <= eps^2/alpha2 = {}",
                params.stability_limit()
            );
        }
        if let Some(m) = m {
            let noisefree = high_gain::hg_error_bound_noisefree(&params, consts.upsilon, m)?;
            let eta = high_gain::ultimate_bound(c1, eps, consts.p_const, consts.q_const, m, 0.0)?;
            println!("M: {m}");
            println!("bound_eps2_upsilon_m: {noisefree:.6}");
            println!("bound_eps_p_m: {eta:.6}");
        }
    }
    Ok(())
}

fn cmd_constants(args: ConstantsArgs) -> CmdResult {
    let from_file = load_optional(args.scenario.as_deref())?;
    let params = from_file
        .as_ref()
        .and_then(|s| s.high_gain_params().copied());
    let alpha1 = args.alpha1.or(params.map(|p| p.alpha1)).ok_or_else(|| {
        Failure::Usage("constants needs --alpha1 (or a high-gain --scenario)".into())
    })?;
    let alpha2 = args.alpha2.or(params.map(|p| p.alpha2)).ok_or_else(|| {
        Failure::Usage("constants needs --alpha2 (or a high-gain --scenario)".into())
    })?;
    let sys = build_error_system(alpha1, alpha2)?;
    let consts = compute_peaking_constants_with(
        &sys,
        PeakingOptions {
            tolerance: args.quad_tolerance,
            max_horizon: args.max_horizon,
        },
    )?;
    let text = consts.report(&sys);
    if let Some(path) = &args.out {
        write_with_parent(path, &text)?;
    }
    print!("{text}");
    Ok(())
}

fn write_with_parent(path: &Path, text: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)
}

fn cmd_sweep(args: SweepArgs) -> CmdResult {
    let scenario = apply_overrides(resolve_scenario(&args.scenario)?, &args.overrides)?;
    let params = *scenario
        .high_gain_params()
        .ok_or_else(|| Failure::Usage(format!("{} is not a high-gain scenario", scenario.name)))?;
    let eps_values = if args.eps.is_empty() {
        let centre = match (
            scenario.signal.second_deriv_bound(),
            scenario.signal.noise_bound(),
        ) {
            (m, n) if m > 0.0 && n > 0.0 => {
                let sys = build_error_system(params.alpha1, params.alpha2)?;
                let c = robust_diff::compute_peaking_constants(&sys, DEFAULT_QUAD_TOLERANCE)?;
                high_gain::optimal_eps_gain(c.p_const, c.q_const, m, n)?
            }
            _ => params.eps_gain,
        };
        [0.25, 0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|k| k * centre)
            .collect()
    } else {
        args.eps
    };

    let rows = scenario::sweep_eps_gain(&scenario, &eps_values)?;
    fs::create_dir_all(&args.out_dir)?;
    let path = args
        .out_dir
        .join(format!("{}.sweep.csv", file_stem(&scenario.name)));
    let mut w = csv::Writer::from_path(&path).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut write = |rec: [String; 3]| {
        w.write_record(rec)
            .map_err(|e| Failure::Usage(e.to_string()))
    };
    write([
        "eps_gain".into(),
        "steady_sup_error".into(),
        "eta_bound".into(),
    ])?;
    println!(
        "{:>12}  {:>18}  {:>12}",
        "eps_gain", "steady_sup_error", "eta_bound"
    );
    for r in &rows {
        write([
            format!("{:e}", r.eps_gain),
            format!("{:e}", r.steady_sup_error),
            format!("{:e}", r.eta_bound),
        ])?;
        println!(
            "{:>12.6}  {:>18.6}  {:>12.6}",
            r.eps_gain, r.steady_sup_error, r.eta_bound
        );
    }
    w.flush()?;
    Ok(())
}
