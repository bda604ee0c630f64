mod commands;
mod config;
mod verify;

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{write_sidecar, CommonArgs, ConfigError, RunConfig};

/// Parametric oscillator driven through a frequency ramp, with and without
/// the counter-diabatic correction.
#[derive(Parser)]
#[command(name = "qpo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classical solutions, Wronskian and energies on a uniform grid.
    Trajectory(CommonArgs),
    /// Adiabaticity parameters of both oscillator variants.
    Qfactor(CommonArgs),
    /// Lowest-level persistence probabilities over time.
    Probabilities(ProbabilityArgs),
    /// Internal consistency checks; exits 1 if any fails.
    Verify(VerifyArgs),
    /// Data for the three bundled ramp durations.
    Figures(CommonArgs),
}

#[derive(Args)]
struct ProbabilityArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Also write the full transition table at this time.
    #[arg(long, allow_negative_numbers = true)]
    table_at: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Evaluate the transitionless Q formula on the uncorrected trajectory,
    /// which must make the check fail.
    #[arg(long)]
    inject_mismatch: bool,
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Trajectory(a) => commands::trajectory(&RunConfig::new("trajectory", &a, "trajectory.csv")?)?,
        Command::Qfactor(a) => commands::qfactor(&RunConfig::new("qfactor", &a, "qfactor.csv")?)?,
        Command::Probabilities(a) => {
            let cfg = RunConfig::new("probabilities", &a.common, "probabilities.csv")?;
            commands::probabilities(&cfg, a.table_at)?
        }
        Command::Figures(a) => commands::figures(&RunConfig::new("figures", &a, "figures")?)?,
        Command::Verify(a) => {
            let cfg = RunConfig::new("verify", &a.common, "verify.json")?;
            let report = verify::run(&cfg, a.inject_mismatch)?;
            for k in &report.checks {
                let verdict = if k.pass { "PASS" } else { "FAIL" };
                match &k.note {
                    Some(note) => println!("{verdict} {} ({note})", k.name),
                    None => println!("{verdict} {} residual {:.3e} bound {:.3e}", k.name, k.residual, k.bound),
                }
            }
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            if a.common.out.is_some() {
                fs::write(&cfg.output_path, &text)?;
                let residuals = report.checks.iter().map(|k| (k.name.to_string(), k.residual)).collect();
                write_sidecar(&cfg, &residuals)?;
            } else {
                print!("{text}");
            }
            return Ok(report.passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<ConfigError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
