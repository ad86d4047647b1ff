//! Absorption, transmissivity, isolation ratio, insertion loss and the
//! intervals on which both isolation criteria hold.

use serde::Serialize;

use crate::atomdata::{AtomSpecies, PhysicalConstants};
use crate::error::{Error, Result};

/// dB per neper of power: 10/ln 10.
pub const DB_PER_NEPER: f64 = 10.0 / std::f64::consts::LN_10;

/// `N d13²/(ħ ε0) · πΓ/λp · ρ55/Ωp²` in 1/m, with Γ the effective decay Γ51.
pub fn absorption(rho55: f64, omega_p: f64, species: &AtomSpecies, density: f64) -> Result<f64> {
    if omega_p == 0.0 {
        return Err(Error::Domain("absorption from ρ55 needs a non-zero probe Rabi frequency".into()));
    }
    let c = PhysicalConstants::CODATA;
    let (gamma51, _) = species.effective_decays();
    let prefactor = density * species.d13 * species.d13 / (c.hbar * c.epsilon0);
    Ok(prefactor * std::f64::consts::PI * gamma51 / species.lambda_p * rho55 / (omega_p * omega_p))
}

pub fn transmissivity(alpha: f64, length: f64) -> f64 {
    (-alpha * length).exp()
}

/// `10 log10(T⁺/T⁻)`.
pub fn isolation_ratio(t_fwd: f64, t_bwd: f64) -> Result<f64> {
    if !(t_fwd > 0.0) || !(t_bwd > 0.0) {
        return Err(Error::Domain(format!("transmissivities must be positive, got {t_fwd} and {t_bwd}")));
    }
    Ok(10.0 * (t_fwd / t_bwd).log10())
}

/// `−10 log10(T⁺)`.
pub fn insertion_loss(t_fwd: f64) -> Result<f64> {
    if !(t_fwd > 0.0) {
        return Err(Error::Domain(format!("transmissivity must be positive, got {t_fwd}")));
    }
    Ok(-10.0 * t_fwd.log10())
}

/// Isolation ratio from absorption coefficients; finite even when T⁻ underflows.
pub fn isolation_ratio_from_alpha(alpha_fwd: f64, alpha_bwd: f64, length: f64) -> f64 {
    (alpha_bwd - alpha_fwd) * length * DB_PER_NEPER
}

pub fn insertion_loss_from_alpha(alpha_fwd: f64, length: f64) -> f64 {
    alpha_fwd * length * DB_PER_NEPER
}

/// Figures of merit at one value of the scanned variable (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Record {
    pub x: f64,
    pub alpha_fwd: f64,
    pub alpha_bwd: f64,
    pub t_fwd: f64,
    pub t_bwd: f64,
    pub ir_db: f64,
    pub il_db: f64,
}

impl Record {
    pub fn from_alphas(x: f64, alpha_fwd: f64, alpha_bwd: f64, length: f64) -> Self {
        Record {
            x,
            alpha_fwd,
            alpha_bwd,
            t_fwd: transmissivity(alpha_fwd, length),
            t_bwd: transmissivity(alpha_bwd, length),
            ir_db: isolation_ratio_from_alpha(alpha_fwd, alpha_bwd, length),
            il_db: insertion_loss_from_alpha(alpha_fwd, length),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub config_hash: String,
    pub quadrature: String,
    pub timestamp: String,
}

/// Records ordered by strictly increasing `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub variable: String,
    pub records: Vec<Record>,
    pub metadata: RunMetadata,
}

impl Spectrum {
    pub fn new(variable: impl Into<String>, records: Vec<Record>, metadata: RunMetadata) -> Result<Self> {
        if records.windows(2).any(|w| !(w[1].x > w[0].x)) {
            return Err(Error::Invalid("spectrum abscissae must be strictly increasing".into()));
        }
        Ok(Spectrum { variable: variable.into(), records, metadata })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandwidthResult {
    /// Disjoint, sorted `(lo, hi)` intervals of the scanned variable.
    pub intervals: Vec<(f64, f64)>,
    pub total_width: f64,
}

/// Intervals on which `IR > ir_min` and `IL < il_max`, with both quantities
/// interpolated linearly between neighbouring records.
pub fn bandwidth(records: &[Record], ir_min: f64, il_max: f64) -> BandwidthResult {
    let mut pieces: Vec<(f64, f64)> = Vec::new();
    let passes = |r: &Record| r.ir_db > ir_min && r.il_db < il_max;
    for w in records.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        // Parameter t in [0, 1] along the segment where each linear margin is positive.
        let mut lo: f64 = 0.0;
        let mut hi: f64 = 1.0;
        for (m0, m1) in [(a.ir_db - ir_min, b.ir_db - ir_min), (il_max - a.il_db, il_max - b.il_db)] {
            if m0 <= 0.0 && m1 <= 0.0 {
                lo = 1.0;
                hi = 0.0;
            } else if m0 <= 0.0 {
                lo = lo.max(m0 / (m0 - m1));
            } else if m1 <= 0.0 {
                hi = hi.min(m0 / (m0 - m1));
            }
        }
        if hi > lo {
            let x0 = a.x + lo * (b.x - a.x);
            let x1 = a.x + hi * (b.x - a.x);
            match pieces.last_mut() {
                Some(last) if last.1 >= x0 => last.1 = last.1.max(x1),
                _ => pieces.push((x0, x1)),
            }
        }
    }
    if records.len() == 1 && passes(&records[0]) {
        pieces.push((records[0].x, records[0].x));
    }
    let total_width = pieces.iter().map(|(a, b)| b - a).sum();
    BandwidthResult { intervals: pieces, total_width }
}

/// Abscissae where `y(x) − level` changes sign, by linear interpolation.
pub fn crossings(xs: &[f64], ys: &[f64], level: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..xs.len().min(ys.len()) {
        let (m0, m1) = (ys[i - 1] - level, ys[i] - level);
        if m0 == 0.0 {
            if out.last() != Some(&xs[i - 1]) {
                out.push(xs[i - 1]);
            }
        } else if m0 * m1 < 0.0 {
            out.push(xs[i - 1] + m0 / (m0 - m1) * (xs[i] - xs[i - 1]));
        }
    }
    if let (Some(&x), Some(&y)) = (xs.last(), ys.last()) {
        if y == level && out.last() != Some(&x) {
            out.push(x);
        }
    }
    out
}

/// Indices of strict interior local minima of `ys`.
pub fn local_minima(ys: &[f64]) -> Vec<usize> {
    (1..ys.len().saturating_sub(1))
        .filter(|&i| ys[i] < ys[i - 1] && ys[i] < ys[i + 1])
        .collect()
}

/// Indices of strict interior local maxima of `ys`.
pub fn local_maxima(ys: &[f64]) -> Vec<usize> {
    (1..ys.len().saturating_sub(1))
        .filter(|&i| ys[i] > ys[i - 1] && ys[i] > ys[i + 1])
        .collect()
}
