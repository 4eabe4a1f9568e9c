use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use papr_harness::{execute, parse_config, ExperimentConfig, Harness, HarnessError, Stage};

/// PAPR reduction experiments: writes CSV results and a manifest.json.
#[derive(Parser)]
#[command(name = "papr", version)]
struct Cli {
    /// TOML config; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed (overrides `master_seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte-Carlo symbols (overrides `n_symbols`).
    #[arg(long, global = true)]
    symbols: Option<usize>,
    /// Worker threads, 0 for one per core (overrides `workers`).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Mean residual per iteration (residuals.csv).
    Convergence,
    /// PAPR CCDF per method (ccdf.csv).
    Ccdf,
    /// PSD before and after the amplifier (psd.csv).
    Psd,
    /// Bit error rate over the Eb/N0 grid (ber.csv).
    Ber,
    /// Per-iteration timing versus signal length (scaling.csv).
    Scaling,
    /// Every experiment above.
    All,
    /// Print the resolved configuration as TOML and exit.
    Config,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Convergence => "convergence",
            Command::Ccdf => "ccdf",
            Command::Psd => "psd",
            Command::Ber => "ber",
            Command::Scaling => "scaling",
            Command::All => "all",
            Command::Config => "config",
        }
    }

    fn stages(self) -> Vec<Stage> {
        match self {
            Command::Convergence => vec![Stage::Convergence],
            Command::Ccdf => vec![Stage::Ccdf],
            Command::Psd => vec![Stage::Psd],
            Command::Ber => vec![Stage::Ber],
            Command::Scaling => vec![Stage::Scaling],
            Command::All => Stage::ALL.to_vec(),
            Command::Config => Vec::new(),
        }
    }
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match &cli.config {
        Some(path) => parse_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(n) = cli.symbols {
        cfg.n_symbols = n;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), HarnessError> {
    let cfg = resolve(cli)?;
    if let Command::Config = cli.command {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    for w in cfg.solver.warnings() {
        eprintln!("warning: {w}");
    }
    let harness = Harness::new(cfg)?;
    let manifest = execute(&harness, cli.command.name(), &cli.command.stages())?;
    for (stage, file) in manifest.stages.iter().zip(&manifest.files) {
        println!(
            "{:<12} {:>8.2} s  {}  sha256 {}",
            stage.stage,
            stage.seconds,
            harness.out_dir().join(&file.name).display(),
            file.sha256
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
