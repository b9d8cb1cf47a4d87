//! Command-line surface: configuration parsing, scenario presets, penalty
//! sweeps, and file output.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric error
//! (instability, divergence, singularity, non-convergence).

pub mod config;
pub mod presets;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::plant::Eq39Sign;
use crate::rng::GENERATOR_NAME;
use crate::simulator::{trace_to_csv, TraceMeta};

pub use config::{apply_overrides, parse_config, RunConfig};
pub use presets::{
    execute, instantiate, load_preset, run_preset, sweep_beta, Instance, PRESET_NAMES,
};

#[derive(Parser, Debug)]
#[command(
    name = "switchctl",
    version,
    about = "Optimal on-off controller synthesis and closed-loop validation for a buck converter"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Override the scenario seed (shorthand for sim.seed=N).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Use the literal published variants: the +1/L plant sign (which trips
    /// the stability gate) and the literal affine coefficients.
    #[arg(long, global = true)]
    paper_literal: bool,

    /// Directory for generated files; created if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize the value function and policy gains, printing them as JSON.
    Synth {
        /// Configuration file.
        config: PathBuf,
        /// KEY=VALUE overrides applied after load, before validation.
        #[arg(value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run a closed-loop scenario from a config file or a named preset.
    Sim {
        /// Config path and/or KEY=VALUE overrides.
        #[arg(value_name = "CONFIG|KEY=VALUE")]
        args: Vec<String>,
        /// Named scenario preset (fig2, fig3, fig4, fig5, fig6a, fig6b).
        #[arg(long)]
        preset: Option<String>,
    },
    /// Re-synthesize and re-run a steady-window scenario per penalty value.
    SweepBeta {
        /// Base configuration file.
        config: PathBuf,
        /// Comma-separated penalty values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Compare the affine policy against exhaustive enumeration and grid
    /// value iteration.
    OracleCompare {
        /// Configuration file.
        config: PathBuf,
        /// Truncated horizon for the exhaustive search (at most 16).
        #[arg(long, default_value_t = 12)]
        horizon: usize,
        /// Number of sampled (state, switch) pairs for the agreement figure.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

/// Entry point used by the binary: parses arguments from the environment and
/// maps errors onto the exit-code contract.
pub fn main() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let sign = if cli.paper_literal {
        Eq39Sign::PaperLiteral
    } else {
        Eq39Sign::HurwitzFixed
    };
    match &cli.command {
        Command::Synth { config, overrides } => {
            let cfg = load_config(config, overrides, cli.seed)?;
            let instance = instantiate(&cfg, sign)?;
            print_warnings(&instance);
            let report = report::synth_report(&instance);
            let json = to_pretty(&report);
            println!("{json}");
            if let Some(dir) = &cli.out {
                write_file(&dir.join("synth.json"), &json)?;
            }
            Ok(())
        }
        Command::Sim { args, preset } => {
            let (path, overrides) = split_sim_args(args)?;
            let (cfg, execution) = match (path, preset) {
                (Some(_), Some(_)) => {
                    return Err(Error::Config(
                        "pass either a config file or --preset, not both".into(),
                    ))
                }
                (None, None) => {
                    return Err(Error::Config("pass a config file or --preset NAME".into()))
                }
                (Some(p), None) => {
                    let cfg = load_config(&p, &overrides, cli.seed)?;
                    let execution = execute(&cfg, sign)?;
                    (cfg, execution)
                }
                (None, Some(name)) => {
                    let mut all = overrides;
                    if let Some(seed) = cli.seed {
                        all.push(format!("sim.seed={seed}"));
                    }
                    run_preset(name, &all, sign)?
                }
            };
            print_warnings(&execution.instance);
            let summary = report::summary_report(&cfg, &execution.instance, execution.metrics);
            let json = to_pretty(&summary);
            println!("{json}");

            let meta = TraceMeta {
                config_hash: cfg.hash().to_string(),
                generator: GENERATOR_NAME,
                seed: cfg.seed,
            };
            let csv_path = cfg
                .csv_path
                .clone()
                .map(PathBuf::from)
                .or_else(|| cli.out.as_ref().map(|d| d.join("trace.csv")));
            if let Some(p) = csv_path {
                write_file(&p, &trace_to_csv(&execution.trace, Some(&meta)))?;
            }
            let summary_path = cfg
                .summary_path
                .clone()
                .map(PathBuf::from)
                .or_else(|| cli.out.as_ref().map(|d| d.join("summary.json")));
            if let Some(p) = summary_path {
                write_file(&p, &json)?;
            }
            Ok(())
        }
        Command::SweepBeta {
            config,
            values,
            overrides,
        } => {
            let cfg = load_config(config, overrides, cli.seed)?;
            let rows = sweep_beta(values, &cfg, sign)?;
            let json = to_pretty(&rows);
            println!("{json}");
            if let Some(dir) = &cli.out {
                write_file(&dir.join("sweep.json"), &json)?;
            }
            Ok(())
        }
        Command::OracleCompare {
            config,
            horizon,
            samples,
            overrides,
        } => {
            let cfg = load_config(config, overrides, cli.seed)?;
            if *horizon > 16 {
                return Err(Error::Config(format!(
                    "--horizon {horizon} exceeds the agreement guard of 16"
                )));
            }
            let instance = instantiate(&cfg, sign)?;
            print_warnings(&instance);
            let report = report::oracle_report(&cfg, &instance, *horizon, *samples)?;
            let json = to_pretty(&report);
            println!("{json}");
            if let Some(dir) = &cli.out {
                write_file(&dir.join("oracle.json"), &json)?;
            }
            Ok(())
        }
    }
}

fn to_pretty<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

fn print_warnings(instance: &Instance) {
    for w in &instance.warnings {
        eprintln!("warning: {w}");
    }
}

fn load_config(path: &Path, overrides: &[String], seed: Option<u64>) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config '{}': {e}", path.display())))?;
    let mut all = overrides.to_vec();
    if let Some(s) = seed {
        all.push(format!("sim.seed={s}"));
    }
    let effective = apply_overrides(&text, &all)?;
    parse_config(&effective)
}

/// Positional arguments of `sim`: at most one bare path, any number of
/// KEY=VALUE overrides.
fn split_sim_args(args: &[String]) -> Result<(Option<PathBuf>, Vec<String>)> {
    let mut path = None;
    let mut overrides = Vec::new();
    for a in args {
        if a.contains('=') {
            overrides.push(a.clone());
        } else if path.is_none() {
            path = Some(PathBuf::from(a));
        } else {
            return Err(Error::Config(format!(
                "unexpected extra positional argument '{a}'"
            )));
        }
    }
    Ok((path, overrides))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| Error::Config(format!("cannot create '{}': {e}", parent.display())))?;
        }
    }
    fs::write(path, contents)
        .map_err(|e| Error::Config(format!("cannot write '{}': {e}", path.display())))
}
