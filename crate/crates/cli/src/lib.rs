//! Command-line front end for `casimir-core`.
//!
//! `casimir density|total|verify|commute|scan` evaluate the models and emit
//! CSV or JSON with every float written at 17 significant digits, so equal
//! configurations give byte-identical output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;

use std::io::Write;

use clap::{Parser, Subcommand};

use crate::commands::{Sweep, DEFAULT_DELTAS, DEFAULT_EPSILONS};
use crate::config::{CommonArgs, Format, UNITS_NOTE};
use crate::error::CliError;
use crate::output::{render_json, to_json, Cell, Table};
use crate::verify::Suite;

#[derive(Debug, Parser)]
#[command(name = "casimir", version, about = "Regularized vacuum energies between Dirichlet boundaries")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy-density profile on a θ-grid
    Density,
    /// Total energy (and force per plate area for the em model)
    Total,
    /// Run the invariant suite; exits 1 if any check fails
    Verify {
        #[arg(long, value_enum, default_value = "quick")]
        suite: Suite,
    },
    /// Compare sum-then-regularize with integrate-then-regularize
    Commute {
        /// Decreasing boundary margins δ
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_DELTAS)]
        deltas: Vec<f64>,
        /// Decreasing cutoffs ε
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_EPSILONS)]
        epsilons: Vec<f64>,
    },
    /// Sweep a cutoff, margin or separation
    Scan {
        #[arg(value_enum)]
        sweep: Sweep,
        /// Sweep values (defaults depend on the sweep)
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        /// Angle for the epsilon sweep
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
    },
}

fn write_output(path: Option<&std::path::Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn verify_text(report: &verify::VerifyReport, format: Format) -> Result<String, CliError> {
    Ok(match format {
        Format::Json => render_json(&to_json(report)?),
        Format::Csv => {
            let mut t = Table::new(&["check", "measured", "tolerance", "passed"]);
            for c in &report.checks {
                t.push(vec![
                    Cell::Text(c.name.replace(',', ";")),
                    Cell::Num(c.measured),
                    Cell::Num(c.tolerance),
                    Cell::Text(c.passed.to_string()),
                ]);
            }
            t.to_csv()
        }
    })
}

/// Executes a parsed command line.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    if cli.common.units_note {
        eprintln!("{UNITS_NOTE}");
    }
    let verifying = matches!(cli.command, Command::Verify { .. });
    // verify reports in JSON unless a format was asked for
    let cfg = cli.common.resolve_with_default_format(if verifying { Format::Json } else { Format::Csv })?;
    let text = match &cli.command {
        Command::Density => commands::cmd_density(&cfg)?,
        Command::Total => commands::cmd_total(&cfg)?,
        Command::Commute { deltas, epsilons } => commands::cmd_commute(&cfg, deltas, epsilons)?,
        Command::Scan { sweep, values, theta } => {
            let values = values.clone().unwrap_or_else(|| sweep.default_values());
            commands::cmd_scan(&cfg, *sweep, &values, *theta)?
        }
        Command::Verify { suite } => {
            let scale = verify::tolerance_scale_from_env()?;
            let report = verify::run_suite(*suite, &cfg.geometry, scale);
            write_output(cfg.out.as_deref(), &verify_text(&report, cfg.format)?)?;
            if !report.passed {
                return Err(CliError::Verification {
                    failed: report.failed(),
                    total: report.checks.len(),
                });
            }
            return Ok(());
        }
    };
    write_output(cfg.out.as_deref(), &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_global_flags_after_subcommand() {
        let cli = Cli::try_parse_from(["casimir", "density", "--length", "2", "--grid", "5"]).unwrap();
        assert_eq!(cli.common.length, Some(2.0));
        assert_eq!(cli.common.grid, Some(5));
        let cli = Cli::try_parse_from(["casimir", "--model", "em3d", "total"]).unwrap();
        assert_eq!(cli.common.model, Some(config::ModelKind::Em));
    }

    #[test]
    fn commute_lists() {
        let cli = Cli::try_parse_from(["casimir", "commute", "--deltas", "0.1,0.05"]).unwrap();
        let Command::Commute { deltas, epsilons } = cli.command else { panic!() };
        assert_eq!(deltas, vec![0.1, 0.05]);
        assert_eq!(epsilons, DEFAULT_EPSILONS.to_vec());
    }
}
