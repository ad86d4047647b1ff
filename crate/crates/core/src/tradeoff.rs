//! Maximize isolation ratio subject to an insertion-loss ceiling.
//!
//! A coarse grid over the free coordinates is followed by cyclic
//! golden-section refinement of one coordinate at a time. Every candidate is
//! scored with the caller's full evaluation, never a surrogate.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bound {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    /// Refinement stops once the golden-section bracket is narrower than this.
    pub resolution: f64,
}

impl Bound {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64, resolution: f64) -> Self {
        Bound { name: name.into(), lo, hi, resolution }
    }

    pub fn fixed(name: impl Into<String>, value: f64) -> Self {
        Bound { name: name.into(), lo: value, hi: value, resolution: 0.0 }
    }

    fn is_free(&self) -> bool {
        self.hi > self.lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Merit {
    pub ir_db: f64,
    pub il_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffResult {
    pub point: Vec<f64>,
    pub merit: Merit,
    pub feasible: bool,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub il_max: f64,
    /// Grid points per free coordinate.
    pub grid: usize,
    pub max_cycles: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { il_max: 1.0, grid: 9, max_cycles: 8 }
    }
}

const INFEASIBLE: f64 = -1e9;

fn score(m: &Merit, il_max: f64) -> f64 {
    if m.il_db <= il_max {
        m.ir_db
    } else {
        INFEASIBLE - (m.il_db - il_max)
    }
}

struct Scorer<'a, F> {
    eval: &'a F,
    il_max: f64,
    evaluations: usize,
    best_feasible: Option<(Vec<f64>, Merit)>,
    best_il: Option<(Vec<f64>, Merit)>,
}

impl<F: Fn(&[f64]) -> Result<Merit>> Scorer<'_, F> {
    fn score(&mut self, x: &[f64]) -> Result<f64> {
        let m = (self.eval)(x)?;
        self.evaluations += 1;
        if m.il_db <= self.il_max && self.best_feasible.as_ref().is_none_or(|(_, b)| m.ir_db > b.ir_db) {
            self.best_feasible = Some((x.to_vec(), m));
        }
        if self.best_il.as_ref().is_none_or(|(_, b)| m.il_db < b.il_db) {
            self.best_il = Some((x.to_vec(), m));
        }
        Ok(score(&m, self.il_max))
    }
}

/// Searches the box `bounds` for the largest IR with `IL ≤ il_max`.
///
/// Returns the best feasible point, or the lowest-IL point with
/// `feasible = false` when no candidate met the ceiling.
pub fn tradeoff_search<F>(bounds: &[Bound], opts: &SearchOptions, eval: F) -> Result<TradeoffResult>
where
    F: Fn(&[f64]) -> Result<Merit>,
{
    if bounds.is_empty() {
        return Err(Error::Invalid("trade-off search needs at least one coordinate".into()));
    }
    if bounds.iter().any(|b| !(b.hi >= b.lo) || !b.lo.is_finite() || !b.hi.is_finite()) {
        return Err(Error::Invalid("trade-off bounds must be finite with lo <= hi".into()));
    }
    if !(opts.il_max > 0.0) {
        return Err(Error::Invalid("il_max must be > 0".into()));
    }
    let grid = opts.grid.max(2);
    let free: Vec<usize> = (0..bounds.len()).filter(|&i| bounds[i].is_free()).collect();
    let mut sc = Scorer { eval: &eval, il_max: opts.il_max, evaluations: 0, best_feasible: None, best_il: None };

    // Coarse grid, row-major over the free coordinates.
    let base: Vec<f64> = bounds.iter().map(|b| b.lo).collect();
    let total = grid.pow(free.len() as u32);
    let mut best_x = base.clone();
    let mut best_s = f64::NEG_INFINITY;
    for idx in 0..total {
        let mut x = base.clone();
        let mut rem = idx;
        for &c in &free {
            let k = rem % grid;
            rem /= grid;
            let b = &bounds[c];
            x[c] = b.lo + (b.hi - b.lo) * k as f64 / (grid - 1) as f64;
        }
        let s = sc.score(&x)?;
        if s > best_s {
            best_s = s;
            best_x = x;
        }
    }

    // Cyclic golden-section around the incumbent, one grid step either side.
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut half: Vec<f64> = bounds.iter().map(|b| (b.hi - b.lo) / (grid - 1) as f64).collect();
    for _ in 0..opts.max_cycles {
        let mut moved = false;
        for &c in &free {
            let b = &bounds[c];
            if half[c] < b.resolution {
                continue;
            }
            let mut lo = (best_x[c] - half[c]).max(b.lo);
            let mut hi = (best_x[c] + half[c]).min(b.hi);
            let mut x = best_x.clone();
            let mut x1 = hi - inv_phi * (hi - lo);
            let mut x2 = lo + inv_phi * (hi - lo);
            x[c] = x1;
            let mut f1 = sc.score(&x)?;
            x[c] = x2;
            let mut f2 = sc.score(&x)?;
            while hi - lo > b.resolution {
                if f1 >= f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - inv_phi * (hi - lo);
                    x[c] = x1;
                    f1 = sc.score(&x)?;
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + inv_phi * (hi - lo);
                    x[c] = x2;
                    f2 = sc.score(&x)?;
                }
            }
            let (xc, fc) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
            if fc > best_s {
                best_s = fc;
                best_x[c] = xc;
                moved = true;
            }
            half[c] *= 0.5;
        }
        if !moved && free.iter().all(|&c| half[c] < bounds[c].resolution) {
            break;
        }
    }

    let evaluations = sc.evaluations;
    match (sc.best_feasible, sc.best_il) {
        (Some((point, merit)), _) => Ok(TradeoffResult { point, merit, feasible: true, evaluations }),
        (None, Some((point, merit))) => Ok(TradeoffResult { point, merit, feasible: false, evaluations }),
        (None, None) => Err(Error::Invalid("trade-off search evaluated no points".into())),
    }
}
