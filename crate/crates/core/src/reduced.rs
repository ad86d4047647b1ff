//! Effective three-level Λ model on the basis {|1⟩, |2⟩, |5⟩}.
//!
//! Far-detuned intermediate states |3⟩ and |4⟩ are eliminated, leaving an
//! effective probe `Ωpe` on |1⟩↔|5⟩, an effective coupling `Ωce` on
//! |2⟩↔|5⟩ and light shifts `Δ2d`, `Δ5d`.

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::atomdata::AtomSpecies;
use crate::doppler::VelocityShifts;
use crate::error::{Error, Result};
use crate::liouville::{hermiticity_error, MasterEquation};

/// Denominators of the closed-form population below this (Hz⁴) are singular.
pub const DENOMINATOR_FLOOR: f64 = 1e-30;

/// Field parameters in Hz. Rabi frequencies are real and non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveConfig {
    pub omega_p: f64,
    pub omega_a: f64,
    pub omega_c1: f64,
    pub omega_c2: f64,
    pub delta_p: f64,
    pub delta_a: f64,
    pub delta_c1: f64,
    pub delta_c2: f64,
    /// Common laser linewidth γl.
    pub gamma_l: f64,
    /// Ground-state decoherence γ21.
    pub gamma_21: f64,
    /// Minimum |detuning|/Rabi ratio for the elimination to count as valid.
    pub validity_ratio: f64,
}

impl DriveConfig {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("omega_p", self.omega_p),
            ("omega_a", self.omega_a),
            ("omega_c1", self.omega_c1),
            ("omega_c2", self.omega_c2),
            ("gamma_l", self.gamma_l),
            ("gamma_21", self.gamma_21),
        ];
        for (name, v) in named {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [
            ("delta_p", self.delta_p),
            ("delta_a", self.delta_a),
            ("delta_c1", self.delta_c1),
            ("delta_c2", self.delta_c2),
        ] {
            if !v.is_finite() {
                return Err(Error::Invalid(format!("{name} must be finite")));
            }
        }
        if !(self.validity_ratio > 0.0) {
            return Err(Error::Invalid("validity_ratio must be > 0".into()));
        }
        Ok(())
    }

    /// Whether every shifted single-photon detuning exceeds `validity_ratio`
    /// times the Rabi frequencies on its side of the scheme.
    pub fn is_far_detuned(&self, s: &VelocityShifts) -> bool {
        let left = (self.delta_p + s.p).abs().min((self.delta_a + s.a).abs());
        let right = (self.delta_c1 + s.c1).abs().min((self.delta_c2 + s.c2).abs());
        left >= self.validity_ratio * self.omega_p.max(self.omega_a)
            && right >= self.validity_ratio * self.omega_c1.max(self.omega_c2)
    }
}

/// Effective three-level quantities for one velocity class (Hz unless noted).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedPoint {
    pub omega_pe: f64,
    pub omega_ce: f64,
    pub delta_2d: f64,
    pub delta_5d: f64,
    pub delta_12: f64,
    pub delta_15: f64,
    pub delta_12e: f64,
    pub delta_15e: f64,
    /// Γ, the effective decay rate Γ51 entering the closed form.
    pub gamma_big: f64,
    /// γ = (Γ51 + Γ52)/2 + γl, decay of the optical coherences ρ51, ρ52.
    pub gamma: f64,
    pub eta53: f64,
    pub eta54: f64,
    pub gamma51: f64,
    pub gamma52: f64,
}

impl ReducedPoint {
    /// Laser-linewidth share of `gamma`.
    pub fn gamma_l(&self) -> f64 {
        self.gamma - 0.5 * (self.gamma51 + self.gamma52)
    }
}

/// Builds the effective three-level point for one set of velocity shifts.
pub fn reduce(drive: &DriveConfig, species: &AtomSpecies, s: &VelocityShifts) -> Result<ReducedPoint> {
    let dp = drive.delta_p + s.p;
    let da = drive.delta_a + s.a;
    let dc1 = drive.delta_c1 + s.c1;
    let dc2 = drive.delta_c2 + s.c2;
    for (name, d) in [("probe", dp), ("assistant", da), ("coupling c1", dc1), ("coupling c2", dc2)] {
        if d == 0.0 {
            return Err(Error::Singularity {
                what: format!("{name} single-photon detuning is zero"),
                velocity: None,
            });
        }
    }
    let omega_pe = -drive.omega_p * drive.omega_a / dp;
    let omega_ce = -drive.omega_c1 * drive.omega_c2 / dc2;
    let delta_2d = -drive.omega_c1 * drive.omega_c1 / dc1;
    let delta_5d = drive.omega_a * drive.omega_a / da + drive.omega_c2 * drive.omega_c2 / dc2;
    let delta_12 = dp + da - dc1 - dc2;
    let delta_15 = dp + da;
    let (eta53, eta54) = species.eta();
    let (gamma51, gamma52) = species.effective_decays();
    Ok(ReducedPoint {
        omega_pe,
        omega_ce,
        delta_2d,
        delta_5d,
        delta_12,
        delta_15,
        delta_12e: delta_12 + delta_2d,
        delta_15e: delta_15 + delta_5d,
        gamma_big: gamma51,
        gamma: 0.5 * (gamma51 + gamma52) + drive.gamma_l,
        eta53,
        eta54,
        gamma51,
        gamma52,
    })
}

/// Which width multiplies `Δ12e²` in the closed-form denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rho55Form {
    /// `γ²`, the weak-probe limit of the steady state of the reduced
    /// equations.
    #[default]
    Derived,
    /// `Γ²`, which differs from `Derived` only through γl.
    Published,
}

/// Weak-probe steady-state population of |5⟩ (γ21 neglected).
pub fn rho55_closed_form(pt: &ReducedPoint) -> Result<f64> {
    rho55_closed_form_with(pt, Rho55Form::Derived)
}

pub fn rho55_closed_form_with(pt: &ReducedPoint, form: Rho55Form) -> Result<f64> {
    let oce2 = pt.omega_ce * pt.omega_ce;
    let a = pt.delta_12e;
    let b = pt.delta_15e;
    let width = match form {
        Rho55Form::Derived => pt.gamma,
        Rho55Form::Published => pt.gamma_big,
    };
    let den = oce2 * oce2 - 2.0 * oce2 * a * b + (width * width + b * b) * a * a;
    if !(den.abs() >= DENOMINATOR_FLOOR) {
        return Err(Error::Singularity {
            what: "closed-form denominator vanishes (Ωce = 0 at Δ12e = 0)".into(),
            velocity: None,
        });
    }
    Ok(2.0 * pt.gamma * pt.omega_pe * pt.omega_pe * a * a / pt.gamma_big / den)
}

/// Density matrix on {|1⟩, |2⟩, |5⟩}, stored in that order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix3(pub Matrix3<Complex64>);

impl DensityMatrix3 {
    fn index(level: usize) -> usize {
        match level {
            1 => 0,
            2 => 1,
            5 => 2,
            _ => panic!("the reduced model has levels 1, 2 and 5, not {level}"),
        }
    }

    /// Element `ρ_mn` addressed by level labels 1, 2, 5.
    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.0[(Self::index(m), Self::index(n))]
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&nalgebra::DMatrix::from_iterator(3, 3, self.0.iter().copied()))
    }

    /// `ρ11 + ρ22 + (1 + η53 + η54) ρ55`.
    pub fn weighted_trace(&self, eta53: f64, eta54: f64) -> f64 {
        self.get(1, 1).re + self.get(2, 2).re + (1.0 + eta53 + eta54) * self.get(5, 5).re
    }
}

/// Master equation of the reduced model with ground decoherence `gamma_21`.
pub fn reduced_master_equation(pt: &ReducedPoint, gamma_21: f64) -> MasterEquation {
    let mut me = MasterEquation::new(3);
    me.set_energy(1, pt.delta_12e);
    me.set_energy(2, pt.delta_15e);
    me.set_coupling(0, 2, Complex64::new(pt.omega_pe, 0.0));
    me.set_coupling(1, 2, Complex64::new(pt.omega_ce, 0.0));
    me.add_decay(2, 0, pt.gamma51);
    me.add_decay(2, 1, pt.gamma52);
    me.add_dephasing(0, 2, pt.gamma_l());
    me.add_dephasing(1, 2, pt.gamma_l());
    me.add_dephasing(0, 1, gamma_21);
    me
}

/// Full (not weak-probe) steady state of the reduced equations, with the ρ55
/// equation replaced by the weighted population constraint.
pub fn reduced_steady_state_numeric(pt: &ReducedPoint, gamma_21: f64) -> Result<DensityMatrix3> {
    if !(pt.gamma51 + pt.gamma52 > 0.0) {
        return Err(Error::Invalid("reduced model needs Γ51 + Γ52 > 0".into()));
    }
    let me = reduced_master_equation(pt, gamma_21);
    let weights = [1.0, 1.0, 1.0 + pt.eta53 + pt.eta54];
    let ss = me.steady_state(&weights, 2).map_err(|e| match e {
        Error::DegenerateSteadyState { rcond } => Error::Numerical { rcond },
        other => other,
    })?;
    Ok(DensityMatrix3(Matrix3::from_iterator(ss.rho.iter().copied())))
}
