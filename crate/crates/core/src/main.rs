use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use isingrc::cli::{self, parse_config, CliError, Experiment, ExperimentSpec};

#[derive(Parser)]
#[command(name = "isingrc", version, about = "Quantum Ising chain and continuum random-cluster experiments")]
struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, env = "ISINGRC_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entanglement entropy of the block by exact diagonalization.
    EdEntropy(RunArgs),
    /// Operator-norm distance of reduced densities to a larger reference chain.
    EdNormdiff(RunArgs),
    /// Decay of the side-reaching probability in the random-cluster model.
    RcDecay(RunArgs),
    /// Side-reaching decay across several couplings.
    RcCriticalScan(RunArgs),
    /// Random-cluster correlations against exact diagonalization.
    FkCrosscheck(RunArgs),
    /// Slit agreement probability.
    FkAm(RunArgs),
    /// Separating-set connection probabilities.
    MixingDiag(RunArgs),
    /// Every explicit constant of the bounds, as JSON.
    BoundsReport(RunArgs),
    /// Disordered against homogeneous side-reaching probabilities.
    DisorderSweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path for the CSV (the JSON summary goes beside it); stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extra `key=value` settings overriding the configuration.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Command {
    fn split(self) -> (Experiment, RunArgs) {
        match self {
            Command::EdEntropy(a) => (Experiment::EdEntropy, a),
            Command::EdNormdiff(a) => (Experiment::EdNormdiff, a),
            Command::RcDecay(a) => (Experiment::RcDecay, a),
            Command::RcCriticalScan(a) => (Experiment::RcCriticalScan, a),
            Command::FkCrosscheck(a) => (Experiment::FkCrosscheck, a),
            Command::FkAm(a) => (Experiment::FkAm, a),
            Command::MixingDiag(a) => (Experiment::MixingDiag, a),
            Command::BoundsReport(a) => (Experiment::BoundsReport, a),
            Command::DisorderSweep(a) => (Experiment::DisorderSweep, a),
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let (experiment, args) = cli.command.split();
    let mut entries = match &args.config {
        Some(path) => parse_config(path)?,
        None => Vec::new(),
    };
    for s in &args.set {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got `{s}`")))?;
        entries.push((k.trim().to_string(), v.trim().to_string()));
    }
    if let Some(seed) = args.seed {
        entries.push(("seed".into(), seed.to_string()));
    }
    if let Some(out) = &args.out {
        entries.push(("output".into(), out.display().to_string()));
    }
    let spec = ExperimentSpec::resolve(experiment, &entries)?;
    let started = std::time::Instant::now();
    let rendered = cli::run(&spec, cli::wall_clock_from_env())?;
    log::info!("{experiment} finished in {:.3} s", started.elapsed().as_secs_f64());
    match spec.text("output") {
        Some(path) => {
            for p in cli::write_outputs(&rendered, path.as_ref())? {
                log::info!("wrote {}", p.display());
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            for text in [&rendered.csv, &rendered.json].into_iter().flatten() {
                stdout
                    .write_all(text.as_bytes())
                    .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
