//! Configuration-driven experiment runner: builds families, runs
//! projection and greedy trajectories, computes rate constants, and
//! certifies the decay inequalities, emitting CSV and JSON artifacts.
//!
//! Exit codes: 0 all good, 1 a requested certification failed (reports
//! are still written), 2 configuration or I/O problems (nothing written).

mod config;
mod experiment;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use config::ExperimentConfig;

#[derive(Parser)]
#[command(
    name = "projlab",
    version,
    about = "Projection-iteration laboratory: construct, simulate, measure, certify, sweep"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a family (preset or config) and write family.json.
    Construct {
        /// Preset name: four_lines, bakers, blocks, orthogonal_axes,
        /// slow_witness.
        #[arg(long, conflicts_with = "config")]
        name: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the configured trajectory; write trajectory.csv/.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the configured quantities; write quantities.json.
    Measure {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the configured certifications; exit 1 if any check fails.
    Certify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a parameter grid of experiments concurrently and aggregate.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn preset_config(name: &str) -> Option<serde_json::Value> {
    let params = match name {
        "four_lines" => json!({"eps": 0.1}),
        "bakers" => json!({}),
        "blocks" => json!({"epsilon": 0.25, "blocks": 400}),
        "orthogonal_axes" => json!({"dim": 2}),
        "slow_witness" => json!({"horizon": 50}),
        _ => return None,
    };
    Some(json!({
        "schema_version": config::SCHEMA_VERSION,
        "construction": {"name": name, "params": params},
    }))
}

fn load(config_path: &std::path::Path, seed: Option<u64>, out: Option<PathBuf>) -> anyhow::Result<config::Experiment> {
    ExperimentConfig::from_path(config_path)?.resolve(seed, out)
}

fn run() -> anyhow::Result<u8> {
    let cli = Cli::parse();
    match cli.command {
        Command::Construct { name, config, seed, out } => {
            let exp = match (name, config) {
                (Some(n), None) => {
                    let value = preset_config(&n)
                        .ok_or_else(|| anyhow::anyhow!("unknown preset '{n}'"))?;
                    let parsed: ExperimentConfig = serde_json::from_value(value)?;
                    parsed.resolve(seed, out)?
                }
                (None, Some(path)) => load(&path, seed, out)?,
                _ => anyhow::bail!("give exactly one of --name or --config"),
            };
            experiment::write_family(&exp)?;
            println!("family written to {}", exp.out.join("family.json").display());
            Ok(0)
        }
        Command::Simulate { config, seed, out } => {
            let exp = load(&config, seed, out)?;
            if exp.policy.is_none() || exp.n_steps == 0 {
                anyhow::bail!("simulate needs 'policy' and 'n_steps' in the config");
            }
            experiment::write_family(&exp)?;
            let traj = experiment::run_trajectory(&exp)?;
            println!(
                "simulated {} steps (final norm {:.6e}); results in {}",
                traj.steps(),
                traj.norms.last().unwrap(),
                exp.out.display()
            );
            Ok(0)
        }
        Command::Measure { config, seed, out } => {
            let exp = load(&config, seed, out)?;
            if exp.quantities.is_empty() {
                anyhow::bail!("measure needs a non-empty 'quantities' list in the config");
            }
            experiment::write_family(&exp)?;
            experiment::run_quantities(&exp)?;
            println!("quantities written to {}", exp.out.join("quantities.json").display());
            Ok(0)
        }
        Command::Certify { config, seed, out } => {
            let exp = load(&config, seed, out)?;
            if exp.certifications.is_empty() {
                anyhow::bail!("certify needs a non-empty 'certifications' list in the config");
            }
            experiment::write_family(&exp)?;
            let traj = if exp.policy.is_some() && exp.n_steps > 0 {
                Some(experiment::run_trajectory(&exp)?)
            } else {
                None
            };
            if !exp.quantities.is_empty() {
                experiment::run_quantities(&exp)?;
            }
            let pass = experiment::run_certifications(&exp, traj.as_ref())?;
            if pass {
                println!("all certifications passed; reports in {}", exp.out.display());
                Ok(0)
            } else {
                eprintln!(
                    "certification failures recorded in {}",
                    exp.out.join("certification.json").display()
                );
                Ok(1)
            }
        }
        Command::Sweep { config, out } => {
            sweep::sweep_from_path(&config, out)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
