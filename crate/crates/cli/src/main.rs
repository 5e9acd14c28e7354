use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use approachkit::harness::{
    run_apm_check, run_experiment, write_records, write_results, ExperimentConfig, Format, Mode, OpponentSpec,
};
use approachkit::partial_monitoring::{GameSpec, TargetSpec};
use clap::{Args, Parser, Subcommand};

/// Approachability experiments for repeated vector-valued games.
#[derive(Parser, Debug)]
#[command(name = "approachkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Blackwell's strategy with full monitoring
    Approach(RunArgs),
    /// Robust approachability for set-valued payoffs
    Robust(RunArgs),
    /// The block strategy under partial monitoring
    PmApproach(RunArgs),
    /// External regret minimisation under partial monitoring
    ExternalRegret(RunArgs),
    /// Swap regret over the pure actions and the uniform mixture
    SwapRegret(RunArgs),
    /// An η-calibrated forecaster of the opponent's actions
    Calibrate(RunArgs),
    /// Check the approachability condition under partial monitoring
    CheckApm(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// game description (JSON)
    #[arg(long)]
    game: PathBuf,
    /// target polytope `{normals, offsets}` (JSON); overrides the game file's target
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    horizon: usize,
    /// block length L (default ⌈T^{3/5}⌉)
    #[arg(long)]
    block_len: Option<usize>,
    /// exploration rate γ (default T^{-1/5})
    #[arg(long)]
    exploration: Option<f64>,
    /// use L_n = n^{3/2}, γ_n = n^{-1/2}
    #[arg(long)]
    adaptive: bool,
    /// exponent of the polynomial averaging weights
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// fixed:Q1,Q2,..  cyclic:J1,J2,..  adaptive:RES
    #[arg(long, default_value = "adaptive:0.1")]
    opponent: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    replications: usize,
    /// output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
    /// grid mesh of the condition checks; η for calibrate
    #[arg(long, default_value_t = 0.1)]
    grid_res: f64,
    /// run even if the condition check fails
    #[arg(long)]
    force: bool,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn config(mode: Mode, args: &RunArgs) -> anyhow::Result<ExperimentConfig> {
    let game: GameSpec = read_json(&args.game)?;
    let opponent: OpponentSpec = args.opponent.parse()?;
    let mut c = ExperimentConfig::new(mode, game, opponent);
    if let Some(path) = &args.target {
        let t: TargetSpec = read_json(path)?;
        c.target = Some(t.to_polytope()?);
    }
    c.horizon = args.horizon;
    c.block_len = args.block_len;
    c.exploration = args.exploration;
    c.adaptive = args.adaptive;
    c.alpha = args.alpha;
    c.seed = args.seed;
    c.replications = args.replications;
    c.grid_res = args.grid_res;
    c.force = args.force;
    Ok(c)
}

fn run(mode: Mode, args: &RunArgs) -> anyhow::Result<()> {
    let format: Format = args.format.parse()?;
    let c = config(mode, args)?;
    if mode == Mode::CheckApm {
        let report = run_apm_check(&c)?;
        let mut out = std::io::stdout().lock();
        writeln!(out, "holds: {}", report.holds)?;
        writeln!(out, "signal vectors checked: {}", report.checked)?;
        if let Some(w) = &report.witness {
            writeln!(out, "witness: {w:?}")?;
        }
        if !report.holds && !c.force {
            return Err(approachkit::Error::Precondition("the approachability condition fails".into()).into());
        }
        return Ok(());
    }
    let records = run_experiment(&c)?;
    log::info!("{} rows from {} replication(s)", records.len(), c.replications);
    match &args.out {
        Some(path) => write_results(&records, path, format)?,
        None => write_records(&records, std::io::stdout().lock(), format)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("APPROACHKIT_LOG", "warn")).init();
    let cli = Cli::parse();
    let (mode, args) = match &cli.command {
        Command::Approach(a) => (Mode::Approach, a),
        Command::Robust(a) => (Mode::Robust, a),
        Command::PmApproach(a) => (Mode::PmApproach, a),
        Command::ExternalRegret(a) => (Mode::ExternalRegret, a),
        Command::SwapRegret(a) => (Mode::SwapRegret, a),
        Command::Calibrate(a) => (Mode::Calibrate, a),
        Command::CheckApm(a) => (Mode::CheckApm, a),
    };
    match run(mode, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<approachkit::Error>() {
                Some(approachkit::Error::Precondition(_)) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
