use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use gcs_core::app::{cmd_extract_vclass, cmd_run, cmd_verify};
use gcs_core::GcsError;

/// Coherent-state feedback propagation and its checks.
#[derive(Parser)]
#[command(name = "gcs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate and write diagnostics, trajectory, fields and plots.
    Run(ConfigArg),
    /// Tabulate the classical potential against its closed form.
    ExtractVclass(ConfigArg),
    /// Run the invariant suite; exit 1 if any check fails.
    Verify(ConfigArg),
}

#[derive(Args)]
struct ConfigArg {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    err.downcast_ref::<GcsError>()
        .map(|e| e.exit_code() as u8)
        .unwrap_or(1)
}

fn dispatch(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Run(c) => {
            let s = cmd_run(&c.config).with_context(|| format!("run {}", c.config.display()))?;
            println!(
                "wrote {} snapshots over {} steps to {}; min overlap {:.12}, max dq2 drift {:.3e}",
                s.snapshots,
                s.steps,
                s.output_dir.display(),
                s.min_overlap,
                s.max_dq2_drift
            );
            Ok(0)
        }
        Command::ExtractVclass(c) => {
            let s = cmd_extract_vclass(&c.config).with_context(|| format!("extract-vclass {}", c.config.display()))?;
            println!(
                "wrote {} rows to {}; max relative deviation {:.3e}",
                s.rows.len(),
                s.path.display(),
                s.max_rel_deviation
            );
            Ok(0)
        }
        Command::Verify(c) => {
            let report = cmd_verify(&c.config).with_context(|| format!("verify {}", c.config.display()))?;
            for check in &report.checks {
                println!("{}", check.line());
            }
            for note in &report.notes {
                eprintln!("note: {note}");
            }
            if report.passed() {
                Ok(0)
            } else {
                eprintln!("{} check(s) failed", report.failures());
                Ok(1)
            }
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
