use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wiretap_auth::{run, Command, ExperimentConfig, Failure, RunOptions};

#[derive(Parser)]
#[command(
    name = "wiretap-auth",
    version,
    about = "Experiments for message authentication over a wiretap channel"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Budget override KEY=VALUE (enumeration, exhaustive_output, mc_trials, oracle).
    #[arg(long = "budget-override", global = true, value_name = "K=V")]
    budget_override: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Authentication and channel rates against the secrecy capacity.
    Rates,
    /// Build codebooks and write them to codebook.json.
    Build,
    /// Re-check a codebook file.
    VerifyCodebook {
        /// Codebook file; defaults to the config's `codebook_file`.
        #[arg(long)]
        codebook: Option<PathBuf>,
    },
    /// Honest-session error over the ladder.
    Completeness,
    /// Adversary games.
    Attack,
    /// Key leakage through the wiretap.
    Leakage,
    /// Finite-n lemma checks.
    Lemmas,
    /// Built-in invariant suite.
    Selftest {
        /// Also check this codebook file.
        #[arg(long)]
        codebook: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode, Failure> {
    let (cmd, codebook) = match cli.command {
        Cmd::Rates => (Command::Rates, None),
        Cmd::Build => (Command::Build, None),
        Cmd::VerifyCodebook { codebook } => (Command::VerifyCodebook, codebook),
        Cmd::Completeness => (Command::Completeness, None),
        Cmd::Attack => (Command::Attack, None),
        Cmd::Leakage => (Command::Leakage, None),
        Cmd::Lemmas => (Command::Lemmas, None),
        Cmd::Selftest { codebook } => (Command::Selftest, codebook),
    };
    let cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            Some(ExperimentConfig::from_json(&text)?)
        }
        None => None,
    };
    let opts = RunOptions {
        threads: cli.threads,
        out: cli.out,
        seed: cli.seed,
        budget_overrides: cli.budget_override,
        codebook,
    };
    let summary = run(cmd, cfg, &opts)?;
    println!(
        "{}: {} rows written to {}",
        cmd.name(),
        summary.rows.len(),
        summary.out_dir.display()
    );
    if summary.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        for f in &summary.failures {
            eprintln!("FAILED: {f}");
        }
        Ok(ExitCode::from(1))
    }
}
