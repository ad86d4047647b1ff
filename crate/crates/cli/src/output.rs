//! CSV and JSON rendering.
//!
//! CSV is byte-reproducible: a `# config_hash:` comment, a fixed header and
//! every number written as `{:.12e}`. JSON adds a timestamp and so is not.

use std::fmt::Write as _;

use nonrecip::doppler::QuadratureScheme;
use nonrecip::observables::{BandwidthResult, RunMetadata, Spectrum};
use nonrecip::QuadratureSpec;
use serde::Serialize;

use crate::commands::{OptimizeReport, Row, Table, ValidationReport};
use crate::config::{RunConfig, Variable};
use crate::CliError;

/// Spectrum columns after the optional leading sweep column.
pub const SPECTRUM_COLUMNS: [&str; 7] =
    ["delta_p_mhz", "alpha_fwd_per_cm", "alpha_bwd_per_cm", "t_fwd", "t_bwd", "ir_db", "il_db"];

fn num(x: f64) -> String {
    format!("{x:.12e}")
}

pub fn quadrature_label(q: &QuadratureSpec) -> String {
    match q.scheme {
        QuadratureScheme::Trapezoid => format!("trapezoid nodes={} span={}", q.nodes, q.span),
        QuadratureScheme::Adaptive => format!("adaptive tol={:e} span={}", q.tolerance, q.span),
    }
}

pub fn metadata(cfg: &RunConfig) -> RunMetadata {
    RunMetadata {
        config_hash: cfg.config_hash(),
        quadrature: quadrature_label(&cfg.base.quadrature),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    }
}

/// One CSV data line, without the trailing newline.
pub fn csv_row(variable: Variable, row: &Row) -> String {
    let r = &row.eval.record;
    let mut fields = Vec::with_capacity(8);
    if variable != Variable::DeltaP {
        fields.push(num(variable.to_display(row.x)));
    }
    fields.extend([
        num(row.delta_p / 1e6),
        num(r.alpha_fwd / 100.0),
        num(r.alpha_bwd / 100.0),
        num(r.t_fwd),
        num(r.t_bwd),
        num(r.ir_db),
        num(r.il_db),
    ]);
    fields.join(",")
}

pub fn table_csv(table: &Table, config_hash: &str) -> String {
    let mut out = format!("# config_hash: {config_hash}\n");
    let mut header: Vec<String> = Vec::new();
    if table.variable != Variable::DeltaP {
        header.push(table.variable.column());
    }
    header.extend(SPECTRUM_COLUMNS.iter().map(|s| s.to_string()));
    out.push_str(&header.join(","));
    out.push('\n');
    for row in &table.rows {
        out.push_str(&csv_row(table.variable, row));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct TableJson<'a> {
    #[serde(flatten)]
    spectrum: &'a Spectrum,
    /// Δp of each record in Hz; differs from `x` unless Δp is swept.
    delta_p: Vec<f64>,
}

pub fn table_json(table: &Table, cfg: &RunConfig) -> Result<String, CliError> {
    let records = table.rows.iter().map(|r| r.eval.record).collect();
    let spectrum = Spectrum::new(table.variable.name(), records, metadata(cfg))?;
    let doc = TableJson { spectrum: &spectrum, delta_p: table.column(|r| r.delta_p) };
    Ok(serde_json::to_string_pretty(&doc).expect("spectrum serializes") + "\n")
}

pub fn validation_csv(report: &ValidationReport, config_hash: &str) -> String {
    let mut out = format!("# config_hash: {config_hash}\n");
    out.push_str("delta_p_mhz,alpha_reduced_per_cm,alpha_full_per_cm,abs_deviation_per_cm\n");
    for ((dp, a), b) in report.delta_p.iter().zip(&report.alpha_reduced).zip(&report.alpha_full) {
        let _ = writeln!(out, "{},{},{},{}", num(dp / 1e6), num(a / 100.0), num(b / 100.0), num((a - b).abs() / 100.0));
    }
    out
}

pub fn validation_json(report: &ValidationReport, cfg: &RunConfig) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        #[serde(flatten)]
        report: &'a ValidationReport,
        metadata: RunMetadata,
    }
    serde_json::to_string_pretty(&Doc { report, metadata: metadata(cfg) }).expect("report serializes") + "\n"
}

pub fn validation_summary(report: &ValidationReport) -> String {
    format!(
        "max deviation {:.4}% of peak at delta_p = {:.3} MHz (threshold {:.2}%): {}",
        100.0 * report.max_deviation,
        report.worst_delta_p / 1e6,
        100.0 * report.threshold,
        if report.passed { "PASS" } else { "FAIL" }
    )
}

pub fn bandwidth_json(result: &BandwidthResult, variable: Variable, cfg: &RunConfig) -> String {
    #[derive(Serialize)]
    struct Doc {
        variable: String,
        ir_min_db: f64,
        il_max_db: f64,
        intervals: Vec<(f64, f64)>,
        total_width: f64,
        metadata: RunMetadata,
    }
    let d = |x: f64| variable.to_display(x);
    let doc = Doc {
        variable: variable.column(),
        ir_min_db: cfg.criteria.ir_min_db,
        il_max_db: cfg.criteria.il_max_db,
        intervals: result.intervals.iter().map(|&(a, b)| (d(a), d(b))).collect(),
        total_width: variable.to_display(result.total_width),
        metadata: metadata(cfg),
    };
    serde_json::to_string_pretty(&doc).expect("bandwidth serializes") + "\n"
}

pub fn bandwidth_csv(result: &BandwidthResult, variable: Variable, config_hash: &str) -> String {
    let (unit, _) = variable.display_unit();
    let mut out = format!("# config_hash: {config_hash}\nlo_{unit},hi_{unit}\n");
    for &(a, b) in &result.intervals {
        let _ = writeln!(out, "{},{}", num(variable.to_display(a)), num(variable.to_display(b)));
    }
    out
}

pub fn optimize_json(report: &OptimizeReport, cfg: &RunConfig) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        #[serde(flatten)]
        report: &'a OptimizeReport,
        metadata: RunMetadata,
    }
    serde_json::to_string_pretty(&Doc { report, metadata: metadata(cfg) }).expect("report serializes") + "\n"
}
