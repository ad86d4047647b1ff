//! Computations behind each subcommand, independent of file output.

use log::{info, warn};
use nonrecip::doppler::QuadratureScheme;
use nonrecip::observables::{bandwidth, BandwidthResult};
use nonrecip::scenario::{run_sweep, Evaluation, Scenario};
use nonrecip::tradeoff::{tradeoff_search, Bound, Merit, SearchOptions, TradeoffResult};
use serde::Serialize;

use crate::config::{RunConfig, Sweep, Variable};
use crate::CliError;

/// One evaluated sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    /// Sweep coordinate in SI.
    pub x: f64,
    /// Probe detuning actually used at this point, in Hz.
    pub delta_p: f64,
    pub eval: Evaluation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub variable: Variable,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn column(&self, f: impl Fn(&Row) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }
}

fn require_sweep(cfg: &RunConfig) -> Result<&Sweep, CliError> {
    cfg.sweep.as_ref().ok_or_else(|| CliError::Config("this command needs a [sweep] section".into()))
}

/// Scenarios for every sweep point, validated before any evaluation.
pub fn sweep_points(cfg: &RunConfig) -> Result<Vec<(f64, Scenario)>, CliError> {
    let sw = require_sweep(cfg)?;
    sw.values()
        .into_iter()
        .map(|x| {
            let sc = cfg.scenario_at(sw.variable, x, &sw.links)?;
            sc.validate().map_err(|e| CliError::Config(format!("{} = {}: {e}", sw.variable, sw.variable.to_display(x))))?;
            Ok((x, sc))
        })
        .collect()
}

/// Evaluates the configured sweep; `spectrum` additionally requires Δp as the
/// sweep variable.
pub fn table(cfg: &RunConfig) -> Result<Table, CliError> {
    let sw = require_sweep(cfg)?;
    let points = sweep_points(cfg)?;
    let evals = run_sweep(&points)?;
    let rows: Vec<Row> = points
        .iter()
        .zip(evals)
        .map(|((x, sc), eval)| Row { x: *x, delta_p: sc.drive.delta_p, eval })
        .collect();
    log_diagnostics(cfg, &rows);
    Ok(Table { variable: sw.variable, rows })
}

pub fn spectrum(cfg: &RunConfig) -> Result<Table, CliError> {
    let sw = require_sweep(cfg)?;
    if sw.variable != Variable::DeltaP {
        return Err(CliError::Config(format!(
            "spectrum sweeps delta_p; got sweep.variable = {} (use the sweep command)",
            sw.variable
        )));
    }
    table(cfg)
}

/// Re-evaluates one row on the calling thread.
pub fn reevaluate(cfg: &RunConfig, x: f64) -> Result<Evaluation, CliError> {
    let sw = require_sweep(cfg)?;
    let sc = cfg.scenario_at(sw.variable, x, &sw.links)?;
    Ok(sc.evaluate(x)?)
}

fn log_diagnostics(cfg: &RunConfig, rows: &[Row]) {
    let mut evaluations = 0usize;
    let mut excluded: f64 = 0.0;
    let mut worst_error: f64 = 0.0;
    for r in rows {
        for a in [&r.eval.forward, &r.eval.backward] {
            evaluations += a.evaluations;
            excluded = excluded.max(a.excluded_weight);
            if a.value != 0.0 {
                worst_error = worst_error.max(a.error / a.value.abs());
            }
        }
    }
    let q = &cfg.base.quadrature;
    match q.scheme {
        QuadratureScheme::Trapezoid => info!(
            "trapezoid quadrature: {} nodes over ±{} v_p, {evaluations} integrand evaluations",
            q.nodes, q.span
        ),
        QuadratureScheme::Adaptive => {
            info!("adaptive quadrature: {evaluations} integrand evaluations, worst relative error estimate {worst_error:.3e}");
            if worst_error > q.tolerance {
                warn!("adaptive quadrature missed the requested tolerance {:.1e}", q.tolerance);
            }
        }
    }
    info!("largest Maxwell weight excluded by the far-detuning condition: {excluded:.3e}");
    if excluded > 0.05 {
        warn!("more than 5% of the velocity distribution violates the far-detuning condition");
    }
}

/// Intervals of the sweep variable where both isolation criteria hold.
pub fn bandwidth_of(table: &Table, cfg: &RunConfig) -> BandwidthResult {
    let records: Vec<_> = table.rows.iter().map(|r| r.eval.record).collect();
    bandwidth(&records, cfg.criteria.ir_min_db, cfg.criteria.il_max_db)
}

/// Reduced-model and five-level absorption of the zero-velocity class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ratio: Option<f64>,
    /// Δp in Hz.
    pub delta_p: Vec<f64>,
    /// Reduced-model absorption, 1/m.
    pub alpha_reduced: Vec<f64>,
    /// Five-level absorption, 1/m.
    pub alpha_full: Vec<f64>,
    /// `max |α − α̃| / max α̃` over the window.
    pub max_deviation: f64,
    /// Δp (Hz) at which the largest deviation occurs.
    pub worst_delta_p: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Compares the two models over Δp ∈ −Δa ± window at v = 0.
///
/// With `validate.ratio` set, Δa = Δc1 = ratio·Ωa and Δc2 follows the
/// light-shift lock before the window is placed.
pub fn validate(cfg: &RunConfig) -> Result<ValidationReport, CliError> {
    let spec = cfg.validate;
    let mut base = cfg.base.clone();
    if let Some(ratio) = spec.ratio {
        base.drive.delta_a = ratio * base.drive.omega_a;
        base.drive.delta_c1 = ratio * base.drive.omega_a;
        crate::config::DeltaC2Lock::LightShift.apply(&mut base)?;
    } else if let Some(lock) = cfg.delta_c2_lock {
        lock.apply(&mut base)?;
    }
    base.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let centre = -base.drive.delta_a;
    let n = spec.points;
    let delta_p: Vec<f64> = (0..n)
        .map(|i| centre - spec.window + 2.0 * spec.window * i as f64 / (n - 1) as f64)
        .collect();

    use rayon::prelude::*;
    let pairs: Vec<(f64, f64)> = delta_p
        .par_iter()
        .map(|&dp| {
            let mut sc = base.clone();
            sc.drive.delta_p = dp;
            Ok((sc.alpha_at_rest_reduced()?, sc.alpha_at_rest_full()?))
        })
        .collect::<Result<_, nonrecip::Error>>()?;
    let (alpha_reduced, alpha_full): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();

    let peak = alpha_full.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let (mut worst, mut worst_i) = (0.0f64, 0usize);
    for (i, (a, b)) in alpha_reduced.iter().zip(&alpha_full).enumerate() {
        let d = (a - b).abs();
        if d > worst {
            worst = d;
            worst_i = i;
        }
    }
    let max_deviation = if peak > 0.0 { worst / peak } else { f64::INFINITY };
    info!(
        "reduced vs five-level at v = 0: max deviation {:.3}% of the peak at Δp = {:.3} MHz",
        100.0 * max_deviation,
        delta_p[worst_i] / 1e6
    );
    Ok(ValidationReport {
        ratio: spec.ratio,
        worst_delta_p: delta_p[worst_i],
        delta_p,
        alpha_reduced,
        alpha_full,
        max_deviation,
        threshold: spec.max_deviation,
        passed: max_deviation <= spec.max_deviation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeReport {
    /// Free parameter names with optimal values in display units.
    pub point: Vec<(String, f64)>,
    pub ir_db: f64,
    pub il_db: f64,
    pub il_max_db: f64,
    pub feasible: bool,
    pub evaluations: usize,
}

/// Maximizes IR subject to IL ≤ il_max over the `[optimize]` box.
pub fn optimize(cfg: &RunConfig) -> Result<(OptimizeReport, TradeoffResult), CliError> {
    let spec = cfg.optimize.as_ref().ok_or_else(|| CliError::Config("optimize needs an [optimize] section".into()))?;
    let vars: Vec<Variable> = spec.free.iter().map(|f| f.variable).collect();
    let bounds: Vec<Bound> = spec.free.iter().map(|f| Bound::new(f.variable.name(), f.from, f.to, f.resolution)).collect();
    let base = cfg.locked_base()?;
    let eval = |x: &[f64]| -> nonrecip::Result<Merit> {
        let mut sc = base.clone();
        for (v, val) in vars.iter().zip(x) {
            v.set(&mut sc, *val);
        }
        if let Some(lock) = cfg.delta_c2_lock {
            if !vars.contains(&Variable::DeltaC2) {
                lock.apply(&mut sc).map_err(|e| nonrecip::Error::Invalid(e.to_string()))?;
            }
        }
        sc.validate()?;
        let r = sc.evaluate(0.0)?.record;
        Ok(Merit { ir_db: r.ir_db, il_db: r.il_db })
    };
    let opts = SearchOptions { il_max: spec.il_max_db, grid: spec.grid, max_cycles: spec.max_cycles };
    let result = tradeoff_search(&bounds, &opts, eval)?;
    let report = OptimizeReport {
        point: vars.iter().zip(&result.point).map(|(v, x)| (v.column(), v.to_display(*x))).collect(),
        ir_db: result.merit.ir_db,
        il_db: result.merit.il_db,
        il_max_db: spec.il_max_db,
        feasible: result.feasible,
        evaluations: result.evaluations,
    };
    Ok((report, result))
}
