//! Command-line front end: config loading, subcommand dispatch and output.

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;
pub mod presets;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use rand::Rng;

use crate::commands::Table;
use crate::config::{Format, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(#[from] nonrecip::Error),
    #[error("no feasible operating point: {0}")]
    Infeasible(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 2 config, 3 numerical, 4 infeasible optimization.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Infeasible(_) => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Forward/backward figures of merit against probe detuning.
    Spectrum,
    /// Figures of merit against any swept parameter.
    Sweep,
    /// Reduced versus five-level absorption of atoms at rest.
    Validate,
    /// Maximize isolation ratio under the insertion-loss ceiling.
    Optimize,
    /// Width of the region meeting both isolation criteria.
    Bandwidth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "nonrecip", version, about = "Direction-dependent probe absorption in thermal five-level atoms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in configuration, e.g. fig3 or fig10a.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    /// Trapezoid node count (odd).
    #[arg(long, global = true)]
    pub quad_nodes: Option<usize>,
    /// Velocity window half-width in units of the most probable speed.
    #[arg(long, global = true)]
    pub quad_span: Option<f64>,
    /// Relative tolerance; selects the adaptive rule.
    #[arg(long, global = true)]
    pub quad_tol: Option<f64>,
    /// Worker threads; defaults to the hardware parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Also render an SVG plot to this path.
    #[arg(long, global = true)]
    pub plot: Option<PathBuf>,
    /// Re-run one randomly chosen row and compare it with the written one.
    #[arg(long, global = true)]
    pub verify: bool,
    /// Isolation-ratio threshold in dB.
    #[arg(long, global = true)]
    pub ir_min: Option<f64>,
    /// Insertion-loss ceiling in dB.
    #[arg(long, global = true)]
    pub il_max: Option<f64>,
}

impl Cli {
    /// Loads the config and applies command-line overrides.
    pub fn resolve_config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), None) => RunConfig::from_file(path)?,
            (None, Some(name)) => presets::load(name)?,
            _ => return Err(CliError::Config("give exactly one of --config or --preset".into())),
        };
        let q = &mut cfg.base.quadrature;
        if let Some(n) = self.quad_nodes {
            q.nodes = n;
        }
        if let Some(s) = self.quad_span {
            q.span = s;
        }
        if let Some(t) = self.quad_tol {
            q.tolerance = t;
            q.scheme = nonrecip::QuadratureScheme::Adaptive;
        }
        if let Some(v) = self.ir_min {
            cfg.criteria.ir_min_db = v;
        }
        if let Some(v) = self.il_max {
            cfg.criteria.il_max_db = v;
            if let Some(o) = cfg.optimize.as_mut() {
                o.il_max_db = v;
            }
        }
        if let Some(p) = &self.out {
            cfg.output.path = Some(p.clone());
        }
        if let Some(f) = self.format {
            cfg.output.format = match f {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs `cli` inside a worker pool of the requested size.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = cli.resolve_config()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    info!("config hash {} on {} threads", cfg.config_hash(), pool.current_num_threads());
    pool.install(|| dispatch(cli, &cfg))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
            }
            std::fs::write(p, text).map_err(|source| CliError::Io { path: p.to_path_buf(), source })
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cli: &Cli, cfg: &RunConfig) -> Result<(), CliError> {
    let out = cfg.output.path.as_deref();
    let hash = cfg.config_hash();
    match cli.command {
        Command::Spectrum | Command::Sweep | Command::Bandwidth => {
            let table = if cli.command == Command::Spectrum { commands::spectrum(cfg)? } else { commands::table(cfg)? };
            if cli.verify {
                verify_random_row(cfg, &table)?;
            }
            if let Some(p) = &cli.plot {
                write_out(Some(p), &table_plot(&table))?;
            }
            if cli.command == Command::Bandwidth {
                let bw = commands::bandwidth_of(&table, cfg);
                eprintln!(
                    "bandwidth (IR > {} dB, IL < {} dB): {:.6} {} in {} interval(s)",
                    cfg.criteria.ir_min_db,
                    cfg.criteria.il_max_db,
                    table.variable.to_display(bw.total_width),
                    table.variable.display_unit().0,
                    bw.intervals.len()
                );
                let text = match cfg.output.format {
                    Format::Csv => output::bandwidth_csv(&bw, table.variable, &hash),
                    Format::Json => output::bandwidth_json(&bw, table.variable, cfg),
                };
                write_out(out, &text)
            } else {
                let text = match cfg.output.format {
                    Format::Csv => output::table_csv(&table, &hash),
                    Format::Json => output::table_json(&table, cfg)?,
                };
                write_out(out, &text)
            }
        }
        Command::Validate => {
            let report = commands::validate(cfg)?;
            eprintln!("{}", output::validation_summary(&report));
            if let Some(p) = &cli.plot {
                let x: Vec<f64> = report.delta_p.iter().map(|d| d / 1e6).collect();
                let svg = plot::render(
                    "Reduced versus five-level absorption at rest",
                    "delta_p (MHz)",
                    &x,
                    &[plot::Panel {
                        y_label: "alpha (1/cm)",
                        series: vec![
                            plot::Series { label: "reduced", color: "#c0392b", y: report.alpha_reduced.iter().map(|a| a / 100.0).collect() },
                            plot::Series { label: "five-level", color: "#2471a3", y: report.alpha_full.iter().map(|a| a / 100.0).collect() },
                        ],
                    }],
                );
                write_out(Some(p), &svg)?;
            }
            let text = match cfg.output.format {
                Format::Csv => output::validation_csv(&report, &hash),
                Format::Json => output::validation_json(&report, cfg),
            };
            write_out(out, &text)
        }
        Command::Optimize => {
            let (report, _) = commands::optimize(cfg)?;
            write_out(out, &output::optimize_json(&report, cfg))?;
            if report.feasible {
                Ok(())
            } else {
                Err(CliError::Infeasible(format!(
                    "lowest insertion loss found is {:.4} dB > {} dB",
                    report.il_db, report.il_max_db
                )))
            }
        }
    }
}

fn verify_random_row(cfg: &RunConfig, table: &Table) -> Result<(), CliError> {
    let i = rand::thread_rng().gen_range(0..table.rows.len());
    let row = &table.rows[i];
    let again = commands::reevaluate(cfg, row.x)?;
    let written = output::csv_row(table.variable, row);
    let rerun = output::csv_row(table.variable, &commands::Row { eval: again, ..*row });
    if written != rerun {
        return Err(CliError::Numerical(nonrecip::Error::Invalid(format!(
            "verification of row {i} failed:\n  written {written}\n  re-run  {rerun}"
        ))));
    }
    eprintln!("verified row {i} of {}", table.rows.len());
    Ok(())
}

fn table_plot(table: &Table) -> String {
    let v = table.variable;
    let x = table.column(|r| v.to_display(r.x));
    let x_label = format!("{} ({})", v.name(), v.display_unit().0);
    plot::render(
        "Forward and backward probe",
        &x_label,
        &x,
        &[
            plot::Panel {
                y_label: "alpha (1/cm)",
                series: vec![
                    plot::Series { label: "forward", color: "#c0392b", y: table.column(|r| r.eval.record.alpha_fwd / 100.0) },
                    plot::Series { label: "backward", color: "#2471a3", y: table.column(|r| r.eval.record.alpha_bwd / 100.0) },
                ],
            },
            plot::Panel {
                y_label: "dB",
                series: vec![
                    plot::Series { label: "IR", color: "#1e8449", y: table.column(|r| r.eval.record.ir_db) },
                    plot::Series { label: "IL", color: "#7d3c98", y: table.column(|r| r.eval.record.il_db) },
                ],
            },
        ],
    )
}

/// Parses `args` (including the program name) and runs them.
pub fn run_args<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Config(e.to_string()))?;
    execute(&cli)
}

