//! Experiment driver behind the `kbe` binary.
//!
//! Exit codes: 0 success, 2 validation failure, 3 numerical failure,
//! 4 I/O failure. The log level comes from `KBE_LOG` (default `warn`).

pub mod commands;
pub mod config;
pub mod csvio;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::persist::{load_emulator, save_emulator};
use crate::testbed::Model;
use commands::*;
use config::{parse_labels, ExperimentConfig};
use csvio::{read_table, write_records, write_table, Table};

#[derive(Debug, Parser)]
#[command(name = "kbe", version, about = "Known-boundary emulation experiments")]
pub struct Cli {
    /// JSON experiment config; paths inside it are relative to its directory.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the design seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file or directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Common correlation length in every input.
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    /// Comma-separated boundary labels, e.g. `K,L,M`; empty for none.
    #[arg(long, global = true)]
    pub boundaries: Option<String>,
    /// Number of training runs.
    #[arg(long = "train-n", global = true)]
    pub train_n: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify every boundary pair; fails if the set admits no analytic update.
    Validate,
    /// Write a maximin Latin hypercube design.
    Design,
    /// Run the simulator on a design.
    RunModel {
        #[arg(long)]
        design: PathBuf,
    },
    /// Fit an emulator and save it as JSON.
    Fit {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        outputs: PathBuf,
        /// Output column; defaults to the model's output of interest.
        #[arg(long)]
        column: Option<String>,
    },
    /// Predict means and variances at points.
    Predict {
        #[arg(long)]
        emulator: PathBuf,
        #[arg(long)]
        points: PathBuf,
    },
    /// Diagnostics for a saved emulator, or the configured sweep.
    Diagnose {
        #[arg(long, requires_all = ["inputs", "truths"])]
        emulator: Option<PathBuf>,
        #[arg(long)]
        inputs: Option<PathBuf>,
        #[arg(long)]
        truths: Option<PathBuf>,
        #[arg(long)]
        column: Option<String>,
    },
    /// Engine against the brute-force oracle: discrepancies and timings.
    CompareOracle,
    /// Gridded data behind the figures and tables.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
        /// Points per side of each plane grid.
        #[arg(long, default_value_t = 50)]
        grid: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// 3D example with boundary K.
    Fig1,
    /// 3D example with boundaries K, L and M.
    Fig2,
    /// Arabidopsis diagnostic points by number of boundaries and runs.
    Fig3,
    /// Arabidopsis sum of variances, MASPE and RMSE over the sweep.
    Table2,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => EXIT_IO,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_VALIDATION,
    }
}

/// Parse `std::env::args`, run, and return the process exit code.
pub fn main() -> i32 {
    init_logging();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn init_logging() {
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("KBE_LOG", "warn")).try_init();
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::for_model(Model::ThreeD),
    };
    if let Some(s) = cli.seed {
        cfg.design.seed = s;
    }
    if let Some(b) = &cli.boundaries {
        cfg.boundaries = parse_labels(b);
        cfg.check()?;
    }
    if let Some(n) = cli.train_n {
        cfg.design.n = n;
    }
    Ok(cfg)
}

fn out_path(cli: &Cli, cfg: &ExperimentConfig, default: &str) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| cfg.output_dir().join(default))
}

fn out_dir(cli: &Cli, cfg: &ExperimentConfig) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| cfg.output_dir())
}

fn output_of(table: &Table, model: Model, column: Option<&str>) -> Result<Vec<f64>> {
    table.column(column.unwrap_or(output_column(model)))
}

/// Execute a parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Validate => {
            let r = validate(&cfg, &cfg.boundaries)?;
            println!("{r}");
        }
        Command::Design => {
            let t = design(cfg.model, cfg.design.n, cfg.design.seed, cfg.design.restarts)?;
            let path = out_path(cli, &cfg, "design.csv");
            write_table(&path, &t)?;
            println!("wrote {} rows to {}", t.rows.len(), path.display());
        }
        Command::RunModel { design } => {
            let t = run_model(cfg.model, &read_table(design)?)?;
            let path = out_path(cli, &cfg, "outputs.csv");
            write_table(&path, &t)?;
            println!("wrote {} rows to {}", t.rows.len(), path.display());
        }
        Command::Fit {
            design,
            outputs,
            column,
        } => {
            let x = read_table(design)?;
            let y = output_of(&read_table(outputs)?, cfg.model, column.as_deref())?;
            let prior = cfg.prior_with(cli.theta)?;
            let em = fit(prior, cfg.boundary_set(&cfg.boundaries)?, &x, &y, cli.train_n)?;
            let path = out_path(cli, &cfg, "emulator.json");
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            save_emulator(&em, Some(cfg.model), &path)?;
            println!("fitted on {} runs (jitter {:e}), saved {}", em.n(), em.jitter(), path.display());
        }
        Command::Predict { emulator, points } => {
            let (em, _) = load_emulator(emulator)?;
            let t = predict(&em, &read_table(points)?)?;
            let path = out_path(cli, &cfg, "predictions.csv");
            write_table(&path, &t)?;
            println!("wrote {} predictions to {}", t.rows.len(), path.display());
        }
        Command::Diagnose {
            emulator,
            inputs,
            truths,
            column,
        } => {
            let rows = match (emulator, inputs, truths) {
                (Some(e), Some(i), Some(t)) => vec![diagnose_saved(e, i, t, column.as_deref())?],
                _ => diagnostic_sweep(&cfg)?,
            };
            let path = out_path(cli, &cfg, "diagnostics.csv");
            write_diagnostics(&path, &rows)?;
            for r in &rows {
                println!(
                    "theta {} TP {} KB {}: sum var {:.2}, MASPE {:.3}, RMSE {:.3}",
                    r.theta, r.n_tp, r.n_kb, r.sum_var, r.maspe, r.rmse
                );
            }
        }
        Command::CompareOracle => {
            let c = compare_oracle_config(&cfg, &cfg.boundaries, cfg.design.n, cli.theta)?;
            let path = out_path(cli, &cfg, "compare_oracle.csv");
            let header: Vec<String> = ORACLE_HEADER.iter().map(|s| s.to_string()).collect();
            write_records(&path, &header, &[c.record()])?;
            println!(
                "oracle size {} (expected {}), engine factor size {}, engine {:?}, oracle {:?}, max rel mean {:e}, var {:e}",
                c.oracle_size,
                c.expected_size.map_or("n/a".into(), |s| s.to_string()),
                c.engine_factor_size,
                c.engine_time,
                c.oracle_time,
                c.max_rel_mean,
                c.max_rel_var
            );
        }
        Command::Reproduce { figure, grid } => reproduce(cli, &cfg, *figure, *grid)?,
    }
    Ok(())
}

fn diagnose_saved(emulator: &Path, inputs: &Path, truths: &Path, column: Option<&str>) -> Result<DiagnosticRow> {
    let (em, model) = load_emulator(emulator)?;
    let x = read_table(inputs)?;
    let t = read_table(truths)?;
    let y = match (column, model) {
        (Some(c), _) => t.column(c)?,
        (None, Some(m)) => t.column(output_column(m))?,
        (None, None) => t.column("f")?,
    };
    let r = crate::analysis::diagnose_emulator(&em, &x.rows, &y)?;
    let theta = em.base().prior().kernel().theta()[0];
    Ok(DiagnosticRow::from_report(theta, em.n(), em.base().boundary_set().len(), &r))
}

fn write_diagnostics(path: &Path, rows: &[DiagnosticRow]) -> Result<()> {
    let header: Vec<String> = DIAGNOSTIC_HEADER.iter().map(|s| s.to_string()).collect();
    let recs: Vec<Vec<String>> = rows.iter().map(DiagnosticRow::record).collect();
    write_records(path, &header, &recs)
}

fn reproduce(cli: &Cli, cfg: &ExperimentConfig, figure: Figure, grid: usize) -> Result<()> {
    let dir = out_dir(cli, cfg);
    match figure {
        Figure::Fig1 | Figure::Fig2 => {
            if cfg.model != Model::ThreeD {
                return Err(Error::Config("fig1 and fig2 use the three_d model".into()));
            }
            let labels: Vec<String> = match figure {
                Figure::Fig1 => vec!["K".into()],
                _ => ["K", "L", "M"].map(String::from).to_vec(),
            };
            let prior = cfg.prior_with(cli.theta)?;
            let em = crate::engine::Emulator::new(
                crate::engine::adjust_set(prior, cfg.boundary_set(&labels)?)?,
                Vec::new(),
                Vec::new(),
            )?;
            let tag = if figure == Figure::Fig1 { "fig1" } else { "fig2" };
            for (i, plane) in FIGURE_PLANES.iter().enumerate() {
                let (t, r) = plane_table(&em, *plane, grid)?;
                let path = dir.join(format!("{tag}_plane{}.csv", i + 1));
                write_table(&path, &t)?;
                println!(
                    "{tag} {}: three-sigma fraction {:.3}, wrote {}",
                    plane.name,
                    r.three_sigma_fraction,
                    path.display()
                );
            }
        }
        Figure::Fig3 => {
            let diag = cfg
                .diagnostic
                .clone()
                .ok_or_else(|| Error::Config("fig3 needs a `diagnostic` section".into()))?;
            let theta = cli.theta.or(cfg.theta).unwrap_or(3.0);
            let sets: Vec<Vec<String>> = (0..=cfg.boundaries.len()).map(|k| cfg.boundaries[..k].to_vec()).collect();
            let n_runs = cli.train_n.unwrap_or(500);
            let data = SweepData::generate(cfg.model, n_runs, cfg.design.seed, diag.n_test, diag.seed, cfg.design.restarts)?;
            let header = ["n_kb", "n_tp", "index", "truth", "mean", "variance"].map(String::from).to_vec();
            let mut rows = Vec::new();
            for labels in &sets {
                for n in [0, n_runs] {
                    let (row, mean, var) = diagnose_cell(cfg, &data, Some(theta), labels, n)?;
                    println!("KB {} TP {n}: MASPE {:.3}", labels.len(), row.maspe);
                    for i in 0..mean.len() {
                        rows.push(vec![labels.len() as f64, n as f64, i as f64, data.test_y[i], mean[i], var[i]]);
                    }
                }
            }
            let path = dir.join("fig3.csv");
            write_table(&path, &Table { header, rows })?;
            println!("wrote {}", path.display());
        }
        Figure::Table2 => {
            let rows = diagnostic_sweep(cfg)?;
            let path = dir.join("table2.csv");
            write_diagnostics(&path, &rows)?;
            println!("wrote {} cells to {}", rows.len(), path.display());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::InvalidPair { pairs: vec![] }), EXIT_VALIDATION);
        assert_eq!(exit_code(&Error::SingularMatrix { size: 3 }), EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), EXIT_IO);
    }

    #[test]
    fn parses_subcommands() {
        let cli = Cli::try_parse_from(["kbe", "--boundaries", "K,M", "validate"]).unwrap();
        assert!(matches!(cli.command, Command::Validate));
        let cli = Cli::try_parse_from(["kbe", "reproduce", "fig2", "--grid", "5", "--out", "x"]).unwrap();
        assert!(matches!(cli.command, Command::Reproduce { figure: Figure::Fig2, grid: 5 }));
        assert!(Cli::try_parse_from(["kbe", "reproduce", "fig9"]).is_err());
    }
}
