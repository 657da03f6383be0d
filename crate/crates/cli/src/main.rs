use clap::{Args, Parser, Subcommand};
use npg_cli::{cmd_compare, cmd_rates, cmd_run, CliError, OverrideSet, QStarSource, RunConfigFile};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "npg",
    version,
    about = "Nonmonotone proximal gradient solvers for composite minimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver variant on one problem, emitting a CSV trace and a
    /// JSON summary
    Run(RunArgs),
    /// Run monotone, average, and max variants on one problem and emit a
    /// comparison table
    Compare(CommonArgs),
    /// Run one variant, then classify its merit convergence rate
    Rates(RatesArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config file; explicit flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem kind: lasso, quartic, l0quad, or box_rosenbrock
    #[arg(long)]
    problem: Option<String>,
    /// PRNG seed for problem data
    #[arg(long)]
    seed: Option<u64>,
    /// Residual rows m of the data matrix
    #[arg(long)]
    rows: Option<usize>,
    /// Problem dimension n
    #[arg(long)]
    cols: Option<usize>,
    /// Regularization weight
    #[arg(long)]
    lam: Option<f64>,
    /// Step-size amplification factor (> 1)
    #[arg(long)]
    tau: Option<f64>,
    /// Lower trial step-size bound
    #[arg(long)]
    gamma_min: Option<f64>,
    /// Upper trial step-size bound
    #[arg(long)]
    gamma_max: Option<f64>,
    /// Sufficient-decrease factor in (0, 1)
    #[arg(long)]
    delta: Option<f64>,
    /// Lower bound for the averaging weights (must exceed 4/5)
    #[arg(long)]
    p_min: Option<f64>,
    /// Window memory of the max variant
    #[arg(long)]
    m: Option<usize>,
    /// Trial step-size rule: constant or bb
    #[arg(long)]
    step_init: Option<String>,
    /// Residual termination threshold
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap
    #[arg(long)]
    max_iter: Option<usize>,
    /// CSV output path (trace for run, table for compare)
    #[arg(long)]
    csv: Option<PathBuf>,
    /// JSON output path (summary for run, report for rates)
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Solver variant: average, max, or monotone
    #[arg(long)]
    variant: Option<String>,
}

#[derive(Args)]
struct RatesArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Solver variant: average, max, or monotone
    #[arg(long)]
    variant: Option<String>,
    /// Reference value source: known, oracle, or longrun
    #[arg(long, default_value = "longrun")]
    q_star_source: String,
}

fn overrides_from(common: &CommonArgs, variant: Option<String>) -> OverrideSet {
    OverrideSet {
        problem: common.problem.clone(),
        seed: common.seed,
        rows: common.rows,
        cols: common.cols,
        lam: common.lam,
        variant,
        tau: common.tau,
        gamma_min: common.gamma_min,
        gamma_max: common.gamma_max,
        delta: common.delta,
        p_min: common.p_min,
        m: common.m,
        step_init: common.step_init.clone(),
        tol: common.tol,
        max_iter: common.max_iter,
        csv: common.csv.clone(),
        json: common.json.clone(),
    }
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Run(args) => {
            let file = args
                .common
                .config
                .as_deref()
                .map(RunConfigFile::load)
                .transpose()?;
            let plan = overrides_from(&args.common, args.variant).resolve(file.as_ref())?;
            cmd_run(&plan)
        }
        Command::Compare(common) => {
            let file = common.config.as_deref().map(RunConfigFile::load).transpose()?;
            let plan = overrides_from(&common, None).resolve(file.as_ref())?;
            cmd_compare(&plan)
        }
        Command::Rates(args) => {
            let source = match args.q_star_source.as_str() {
                "known" => QStarSource::Known,
                "oracle" => QStarSource::Oracle,
                "longrun" => QStarSource::LongRun,
                other => {
                    return Err(CliError::InvalidArgument(format!(
                        "unknown q-star source '{other}' (expected known, oracle, or longrun)"
                    )))
                }
            };
            let file = args
                .common
                .config
                .as_deref()
                .map(RunConfigFile::load)
                .transpose()?;
            let plan = overrides_from(&args.common, args.variant).resolve(file.as_ref())?;
            cmd_rates(&plan, source).map(|(code, _)| code)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
