use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use degenpara_cli::{run, CliError, ExperimentConfig, Kind};

#[derive(Parser)]
#[command(
    name = "degenpara",
    version,
    about = "Experiments for degenerate-parabolic operators on the half-space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `output` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// RNG seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Every kind listed under `kinds` in the config, concurrently.
    Run,
    Solve,
    ValidateCoeffs,
    Norms,
    VerifyMaxprin,
    VerifyBarriers,
    VerifyInterp,
    VerifySchauder,
    Reduce,
    Convergence,
}

impl Command {
    fn kind(self) -> Option<Kind> {
        Some(match self {
            Command::Run => return None,
            Command::Solve => Kind::Solve,
            Command::ValidateCoeffs => Kind::ValidateCoeffs,
            Command::Norms => Kind::Norms,
            Command::VerifyMaxprin => Kind::VerifyMaxprin,
            Command::VerifyBarriers => Kind::VerifyBarriers,
            Command::VerifyInterp => Kind::VerifyInterp,
            Command::VerifySchauder => Kind::VerifySchauder,
            Command::Reduce => Kind::Reduce,
            Command::Convergence => Kind::Convergence,
        })
    }
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn load(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output = o.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let kinds = match cli.command.kind() {
        Some(k) => vec![k],
        None => cfg.kinds.clone(),
    };
    let summary = match run(&cfg, &kinds, &cfg.output) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    for e in &summary.entries {
        println!(
            "{:<16} {:?} ({} checks) -> {}",
            e.kind,
            e.status,
            e.checks,
            cfg.output.join(&e.kind).display()
        );
    }
    if summary.all_passed() {
        ExitCode::SUCCESS
    } else {
        for f in summary.failures() {
            eprintln!("FAILED {f}");
        }
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}
