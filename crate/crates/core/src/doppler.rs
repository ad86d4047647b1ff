//! Velocity shifts of the four detunings and the Maxwell average of ρ55.

use crate::atomdata::{most_probable_speed, AtomSpecies, EnsembleConfig};
use crate::error::{Error, Result};
use crate::quadrature::{complement, gauss_kronrod, trapezoid, Interval};
use crate::reduced::{reduce, rho55_closed_form_with, DriveConfig, Rho55Form};

/// Probe propagation relative to the first coupling beam.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Probe co-propagates with the first coupling beam (α⁺).
    Forward,
    /// Probe counter-propagates (α⁻).
    Backward,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub direction: Direction,
    /// Angle between the counter-propagating pairs, in degrees, in (90, 180].
    pub theta_deg: f64,
}

impl Geometry {
    pub fn new(direction: Direction, theta_deg: f64) -> Result<Self> {
        let g = Geometry { direction, theta_deg };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta_deg > 90.0 && self.theta_deg <= 180.0) {
            return Err(Error::Domain(format!("theta must lie in (90, 180] degrees, got {}", self.theta_deg)));
        }
        Ok(())
    }

    pub fn with_direction(self, direction: Direction) -> Self {
        Geometry { direction, ..self }
    }
}

/// Additive shifts (Hz) to Δp, Δa, Δc1, Δc2 for one velocity class.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VelocityShifts {
    pub p: f64,
    pub a: f64,
    pub c1: f64,
    pub c2: f64,
}

/// `k·cos(180° − θ)`.
pub fn effective_wavevector(k: f64, theta_deg: f64) -> Result<f64> {
    if !(theta_deg > 90.0 && theta_deg <= 180.0) {
        return Err(Error::Domain(format!("theta must lie in (90, 180] degrees, got {theta_deg}")));
    }
    Ok(k * (180.0 - theta_deg).to_radians().cos())
}

/// Shift coefficients per unit velocity (Hz per m/s).
pub fn shift_rates(geom: &Geometry, species: &AtomSpecies) -> Result<VelocityShifts> {
    let [kp, ka, kc1, kc2] = species.wavenumbers();
    let ka = effective_wavevector(ka, geom.theta_deg)?;
    let kc2 = effective_wavevector(kc2, geom.theta_deg)?;
    let s = geom.direction.sign();
    Ok(VelocityShifts { p: s * kp, a: -s * ka, c1: kc1, c2: -kc2 })
}

pub fn shifts_for(geom: &Geometry, species: &AtomSpecies, v: f64) -> Result<VelocityShifts> {
    let r = shift_rates(geom, species)?;
    Ok(VelocityShifts { p: r.p * v, a: r.a * v, c1: r.c1 * v, c2: r.c2 * v })
}

/// One-dimensional Maxwell density `exp(−v²/vp²)/(vp√π)`.
pub fn maxwell_density(v: f64, v_p: f64) -> f64 {
    let x = v / v_p;
    (-x * x).exp() / (v_p * std::f64::consts::PI.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadratureScheme {
    #[default]
    Trapezoid,
    Adaptive,
}

/// Treatment of velocity classes that violate the far-detuning condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InvalidClassPolicy {
    /// Drop them from the average and report their Maxwell weight.
    #[default]
    Exclude,
    /// Fail with a singularity error naming the velocity class.
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub scheme: QuadratureScheme,
    /// Half width of the velocity window in units of v_p.
    pub span: f64,
    /// Trapezoid node count over the full window; odd.
    pub nodes: usize,
    /// Relative tolerance of the adaptive rule.
    pub tolerance: f64,
    pub invalid_classes: InvalidClassPolicy,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            scheme: QuadratureScheme::Trapezoid,
            span: 5.0,
            nodes: 20001,
            tolerance: 1e-6,
            invalid_classes: InvalidClassPolicy::Exclude,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.span >= 4.0) || !self.span.is_finite() {
            return Err(Error::Invalid(format!("quadrature span must be >= 4 v_p, got {}", self.span)));
        }
        if self.nodes < 3 || self.nodes % 2 == 0 {
            return Err(Error::Invalid(format!("quadrature node count must be odd and >= 3, got {}", self.nodes)));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::Invalid(format!("quadrature tolerance must lie in (0, 1), got {}", self.tolerance)));
        }
        Ok(())
    }
}

/// A velocity-averaged population with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Average {
    pub value: f64,
    /// Absolute error estimate (adaptive rule only).
    pub error: f64,
    /// Maxwell weight of the excluded velocity classes.
    pub excluded_weight: f64,
    pub evaluations: usize,
}

/// Open velocity intervals in `[lo, hi]` where the far-detuning condition fails.
pub fn invalid_velocity_intervals(drive: &DriveConfig, rates: &VelocityShifts, lo: f64, hi: f64) -> Vec<Interval> {
    let left = drive.validity_ratio * drive.omega_p.max(drive.omega_a);
    let right = drive.validity_ratio * drive.omega_c1.max(drive.omega_c2);
    let lines = [
        (drive.delta_p, rates.p, left),
        (drive.delta_a, rates.a, left),
        (drive.delta_c1, rates.c1, right),
        (drive.delta_c2, rates.c2, right),
    ];
    let mut out = Vec::new();
    for (d0, c, thr) in lines {
        if c == 0.0 {
            if d0.abs() < thr {
                out.push(Interval { lo, hi });
            }
            continue;
        }
        let a = (-d0 - thr) / c;
        let b = (-d0 + thr) / c;
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        if b > lo && a < hi && b > a {
            out.push(Interval { lo: a, hi: b });
        }
    }
    out
}

fn erf_weight(a: f64, b: f64, v_p: f64) -> f64 {
    0.5 * (libm::erf(b / v_p) - libm::erf(a / v_p))
}

/// Maxwell average of the closed-form ρ55 (γ² denominator).
pub fn rho55_avg(
    geom: &Geometry,
    drive: &DriveConfig,
    species: &AtomSpecies,
    ens: &EnsembleConfig,
    quad: &QuadratureSpec,
) -> Result<Average> {
    rho55_avg_with(geom, drive, species, ens, quad, Rho55Form::Derived)
}

pub fn rho55_avg_with(
    geom: &Geometry,
    drive: &DriveConfig,
    species: &AtomSpecies,
    ens: &EnsembleConfig,
    quad: &QuadratureSpec,
    form: Rho55Form,
) -> Result<Average> {
    geom.validate()?;
    quad.validate()?;
    let v_p = most_probable_speed(species, ens.temperature)?;
    let rates = shift_rates(geom, species)?;
    let lo = -quad.span * v_p;
    let hi = quad.span * v_p;

    let holes = invalid_velocity_intervals(drive, &rates, lo, hi);
    if holes.iter().any(|h| h.lo < 0.0 && h.hi > 0.0) {
        return Err(Error::Domain(
            "drive is not far detuned for the zero-velocity class (raise detunings or lower validity_ratio)".into(),
        ));
    }
    if quad.invalid_classes == InvalidClassPolicy::Error {
        if let Some(h) = holes.first() {
            return Err(Error::Singularity {
                what: "velocity class violates the far-detuning condition".into(),
                velocity: Some(0.5 * (h.lo.max(lo) + h.hi.min(hi))),
            });
        }
    }
    let pieces = complement(lo, hi, &holes);
    let kept: f64 = pieces.iter().map(|p| erf_weight(p.lo, p.hi, v_p)).sum();
    let excluded_weight = (erf_weight(lo, hi, v_p) - kept).max(0.0);

    let integrand = |v: f64| -> Result<f64> {
        let s = VelocityShifts { p: rates.p * v, a: rates.a * v, c1: rates.c1 * v, c2: rates.c2 * v };
        let pt = reduce(drive, species, &s).map_err(|e| with_velocity(e, v))?;
        let r = rho55_closed_form_with(&pt, form).map_err(|e| with_velocity(e, v))?;
        Ok(r * maxwell_density(v, v_p))
    };

    let res = match quad.scheme {
        QuadratureScheme::Trapezoid => trapezoid(integrand, lo, hi, quad.nodes, &pieces)?,
        QuadratureScheme::Adaptive => gauss_kronrod(integrand, &pieces, 256, quad.tolerance, 0.0, 1 << 18)?,
    };
    Ok(Average { value: res.value, error: res.error, excluded_weight, evaluations: res.evaluations })
}

fn with_velocity(e: Error, v: f64) -> Error {
    match e {
        Error::Singularity { what, .. } => Error::Singularity { what, velocity: Some(v) },
        other => other,
    }
}
