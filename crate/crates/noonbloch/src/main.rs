use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use noonbloch::presets::{self, PRESETS};
use noonbloch::run::{resolve_output_dir, run, RunError, OUTPUT_DIR_ENV};
use noonbloch::{parse_config, verify, RunConfig};

/// Photon correlations of NOON states in Bloch-oscillating waveguide lattices.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the observables requested by a config file and write tables.
    Run {
        config: PathBuf,
        /// Output directory, overriding both the config and $NOONBLOCH_OUTPUT_DIR.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verification suite for a config and print the report.
    Verify { config: PathBuf },
    /// Regenerate the tables behind one of the figure presets.
    Preset {
        /// Preset name (fig1a..fig1c, fig2a..fig2d, fig3a..fig3d), or `list`.
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit status for a failed verification; other errors exit with 2.
const VERIFICATION_FAILED: u8 = 1;

fn load(path: &Path) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("invalid config {}", path.display()))
}

fn execute(cfg: &RunConfig, dir: &Path) -> anyhow::Result<ExitCode> {
    match run(cfg, dir) {
        Ok(out) => {
            if let Some(p) = out.period {
                println!(
                    "period {:.6} (predicted {:.6}, relative error {:.2e})",
                    p.estimated_period, p.predicted_period, p.relative_error
                );
            }
            println!("wrote {} file(s) to {}", out.artifacts.len(), dir.display());
            Ok(ExitCode::SUCCESS)
        }
        Err(RunError::VerificationFailed(report)) => {
            eprintln!("{report}");
            eprintln!("verification failed; no output written");
            Ok(ExitCode::from(VERIFICATION_FAILED))
        }
        Err(e) => Err(e.into()),
    }
}

fn main_inner(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load(&config)?;
            let dir = resolve_output_dir(&cfg, out.as_deref());
            execute(&cfg, &dir)
        }
        Command::Verify { config } => {
            let report = verify(&load(&config)?);
            println!("{report}");
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(VERIFICATION_FAILED) })
        }
        Command::Preset { name, out } => {
            if name == "list" {
                for p in PRESETS {
                    println!("{:<6} {}", p.name, p.description);
                }
                return Ok(ExitCode::SUCCESS);
            }
            let preset = presets::find(&name).with_context(|| {
                let names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
                format!("unknown preset `{name}` (available: {})", names.join(", "))
            })?;
            let root = out
                .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(|d| PathBuf::from(d).join(preset.name)))
                .unwrap_or_else(|| preset.default_output_dir());
            for (cfg, dir) in preset.configs(&root)? {
                let code = execute(&cfg, &dir)?;
                if code != ExitCode::SUCCESS {
                    return Ok(code);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
