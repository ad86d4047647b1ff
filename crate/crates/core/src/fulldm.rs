//! Steady state of the full five-level Λ system.
//!
//! Used at a single velocity class to check the reduced model: the probe
//! absorption follows from `Im ρ31` instead of from ρ55.

use nalgebra::{DMatrix, SMatrix};
use num_complex::Complex64;

use crate::atomdata::{AtomSpecies, DecayRates, PhysicalConstants};
use crate::doppler::VelocityShifts;
use crate::error::{Error, Result};
use crate::liouville::{hermiticity_error, MasterEquation};
use crate::reduced::DriveConfig;

/// Rabi frequencies, composed detunings and relaxation of one velocity class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveLevelProblem {
    pub omega_p: f64,
    pub omega_a: f64,
    pub omega_c1: f64,
    pub omega_c2: f64,
    pub delta_12: f64,
    pub delta_13: f64,
    pub delta_14: f64,
    pub delta_15: f64,
    pub decay: DecayRates,
    pub gamma_l: f64,
    pub gamma_21: f64,
}

impl FiveLevelProblem {
    /// Composes Δ13 = Δp, Δ15 = Δp+Δa, Δ14 = Δ15−Δc2, Δ12 = Δ15−Δc1−Δc2 from
    /// the shifted single-photon detunings.
    pub fn new(drive: &DriveConfig, species: &AtomSpecies, s: &VelocityShifts) -> Self {
        let dp = drive.delta_p + s.p;
        let da = drive.delta_a + s.a;
        let dc1 = drive.delta_c1 + s.c1;
        let dc2 = drive.delta_c2 + s.c2;
        let d15 = dp + da;
        FiveLevelProblem {
            omega_p: drive.omega_p,
            omega_a: drive.omega_a,
            omega_c1: drive.omega_c1,
            omega_c2: drive.omega_c2,
            delta_12: d15 - dc1 - dc2,
            delta_13: dp,
            delta_14: d15 - dc2,
            delta_15: d15,
            decay: species.decay,
            gamma_l: drive.gamma_l,
            gamma_21: drive.gamma_21,
        }
    }

    /// Master equation on levels 1..5 stored at indices 0..4.
    pub fn master_equation(&self) -> MasterEquation {
        let mut me = MasterEquation::new(5);
        me.set_energy(1, self.delta_12);
        me.set_energy(2, self.delta_13);
        me.set_energy(3, self.delta_14);
        me.set_energy(4, self.delta_15);
        let real = |x: f64| Complex64::new(x, 0.0);
        me.set_coupling(0, 2, real(self.omega_p));
        me.set_coupling(1, 3, real(self.omega_c1));
        me.set_coupling(2, 4, real(self.omega_a));
        me.set_coupling(3, 4, real(self.omega_c2));
        let d = &self.decay;
        me.add_decay(2, 0, d.g31);
        me.add_decay(2, 1, d.g32);
        me.add_decay(3, 0, d.g41);
        me.add_decay(3, 1, d.g42);
        me.add_decay(4, 2, d.g53);
        me.add_decay(4, 3, d.g54);
        for i in 0..5 {
            for j in (i + 1)..5 {
                let rate = if (i, j) == (0, 1) { self.gamma_21 } else { self.gamma_l };
                me.add_dephasing(i, j, rate);
            }
        }
        me
    }
}

/// Density matrix on levels 1..5.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix5(pub SMatrix<Complex64, 5, 5>);

impl DensityMatrix5 {
    /// Element `ρ_mn` with 1-based level labels.
    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        assert!((1..=5).contains(&m) && (1..=5).contains(&n), "levels are 1..=5");
        self.0[(m - 1, n - 1)]
    }

    pub fn trace(&self) -> f64 {
        (1..=5).map(|k| self.get(k, k).re).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.as_dynamic())
    }

    pub fn as_dynamic(&self) -> DMatrix<Complex64> {
        DMatrix::from_iterator(5, 5, self.0.iter().copied())
    }
}

/// Steady state with the ρ11 equation replaced by unit trace.
pub fn five_level_steady_state(prob: &FiveLevelProblem) -> Result<DensityMatrix5> {
    let d = &prob.decay;
    if d.g31 + d.g32 + d.g41 + d.g42 <= 0.0 {
        return Err(Error::Invalid("no decay path from the excited manifold to the ground states".into()));
    }
    let ss = prob.master_equation().steady_state(&[1.0; 5], 0)?;
    Ok(DensityMatrix5(SMatrix::from_iterator(ss.rho.iter().copied())))
}

/// `N d13²/(ħ ε0) · 2π/λp · Im ρ31 / Ωp` in 1/m.
pub fn alpha_tilde(rho31: Complex64, omega_p: f64, species: &AtomSpecies, density: f64) -> Result<f64> {
    if omega_p == 0.0 {
        return Err(Error::Domain("absorption from ρ31 needs a non-zero probe Rabi frequency".into()));
    }
    let c = PhysicalConstants::CODATA;
    let prefactor = density * species.d13 * species.d13 / (c.hbar * c.epsilon0);
    Ok(prefactor * 2.0 * std::f64::consts::PI / species.lambda_p * rho31.im / omega_p)
}
