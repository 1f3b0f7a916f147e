// chancert: certification experiments for quantum channels against a target
// unitary, in three access models.
//
// Subcommands:
//   certify        Monte Carlo certification trials on one instance family
//   sweep          grid sweep over d and/or eps with scaling-exponent fits
//   verify-lemmas  numerical verification of the two channel inequalities
//   ae-demo        error profile of the simulated amplitude estimation
//
// Exit codes: 0 success, 1 invalid configuration, 2 lemma violation detected.
//
// Examples:
//   chancert certify --family faulty-grover --access incoherent \
//       --d 8 --eps 0.2 --delta 0.1 --p 0.9 --trials 1000 --seed 7 --out runs.csv
//   chancert sweep --access source-code --d 2,4,8,16 --eps 0.2 --trials 1
//   chancert verify-lemmas --trials 200 --seed 3
//   chancert ae-demo --eps 0.02 --delta 0.05 --trials 2000 --out ae.csv

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chancert_cli::config::{Command, ConfigOverrides, ExperimentConfig};
use chancert_cli::runs::{
    emit_ae_demo, emit_certify, emit_lemmas, run_ae_demo, run_certify, run_sweep,
    run_verify_lemmas,
};

#[derive(Parser, Debug)]
#[command(name = "chancert", version, about = "Quantum channel certification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run Monte Carlo certification trials on one instance family
    Certify(RunFlags),
    /// Sweep a (d, eps) grid and fit scaling exponents
    Sweep(RunFlags),
    /// Verify the fidelity/diamond and power-amplification inequalities
    VerifyLemmas(RunFlags),
    /// Profile the simulated amplitude-estimation subroutine
    AeDemo(RunFlags),
}

#[derive(Args, Debug, Default)]
struct RunFlags {
    /// Flat key = value config file; command-line flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for all derived RNG streams
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per grid cell (verify-lemmas: random instances)
    #[arg(long)]
    trials: Option<usize>,
    /// CSV output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (results are independent of this)
    #[arg(long)]
    workers: Option<usize>,
    /// System dimension(s), comma separated (e.g. 2,4,8)
    #[arg(long)]
    d: Option<String>,
    /// Precision(s) in (0, 2], comma separated; ae-demo reads its ε' here
    #[arg(long)]
    eps: Option<String>,
    /// Failure probability in (0, 1)
    #[arg(long)]
    delta: Option<f64>,
    /// Faulty-Grover survival probability p
    #[arg(long)]
    p: Option<f64>,
    /// Faulty-Grover marked index k
    #[arg(long)]
    k: Option<usize>,
    /// Environment dimension for random-channel (default: d)
    #[arg(long = "env-dim")]
    env_dim: Option<usize>,
    /// Instance family: identity | faulty-grover | random-channel | random-unitary
    #[arg(long)]
    family: Option<String>,
    /// Access model: incoherent | coherent | source-code
    #[arg(long)]
    access: Option<String>,
    /// Random restarts of the diamond-norm witness search
    #[arg(long)]
    restarts: Option<usize>,
    /// Amplitude grid for ae-demo, comma separated values in [0, 1]
    #[arg(long = "a-grid")]
    a_grid: Option<String>,
}

impl RunFlags {
    fn into_overrides(self) -> (Option<PathBuf>, ConfigOverrides) {
        (
            self.config,
            ConfigOverrides {
                family: self.family,
                access: self.access,
                d: self.d,
                eps: self.eps,
                delta: self.delta,
                trials: self.trials,
                seed: self.seed,
                workers: self.workers,
                p: self.p,
                k: self.k,
                env_dim: self.env_dim,
                out: self.out,
                restarts: self.restarts,
                a_grid: self.a_grid,
            },
        )
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return ExitCode::from(if ok { 0 } else { 1 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let (command, flags) = match cli.command {
        Cmd::Certify(f) => (Command::Certify, f),
        Cmd::Sweep(f) => (Command::Sweep, f),
        Cmd::VerifyLemmas(f) => (Command::VerifyLemmas, f),
        Cmd::AeDemo(f) => (Command::AeDemo, f),
    };
    let (config_path, overrides) = flags.into_overrides();
    let file = config_path
        .as_deref()
        .map(ConfigOverrides::from_file)
        .transpose()?;
    let config = ExperimentConfig::resolve(command, file, overrides)?;

    // Summaries go to stderr when the CSV occupies stdout.
    let report = |lines: Vec<String>| {
        for line in lines {
            if config.out.is_some() {
                println!("{line}");
            } else {
                eprintln!("{line}");
            }
        }
    };

    match command {
        Command::Certify => {
            let output = run_certify(&config)?;
            report(emit_certify(&config, &output)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep => {
            let output = run_sweep(&config)?;
            let mut lines = emit_certify(&config, &output.certify)?;
            lines.push(output.fit.summary_line());
            report(lines);
            Ok(ExitCode::SUCCESS)
        }
        Command::VerifyLemmas => {
            let output = run_verify_lemmas(&config)?;
            report(emit_lemmas(&config, &output)?);
            if output.violations() > 0 {
                Ok(ExitCode::from(2))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
        Command::AeDemo => {
            let output = run_ae_demo(&config)?;
            report(emit_ae_demo(&config, &output)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}
