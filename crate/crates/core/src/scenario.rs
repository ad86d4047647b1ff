//! Full pipeline from a parameter set to forward/backward figures of merit.

use rayon::prelude::*;

use crate::atomdata::{AtomSpecies, EnsembleConfig};
use crate::doppler::{rho55_avg_with, Average, Direction, Geometry, QuadratureSpec, VelocityShifts};
use crate::error::{Error, Result};
use crate::fulldm::{alpha_tilde, five_level_steady_state, FiveLevelProblem};
use crate::observables::{absorption, Record};
use crate::reduced::{reduce, rho55_closed_form_with, DriveConfig, Rho55Form};

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub species: AtomSpecies,
    pub drive: DriveConfig,
    pub ensemble: EnsembleConfig,
    pub theta_deg: f64,
    pub quadrature: QuadratureSpec,
    pub form: Rho55Form,
}

/// One evaluated point with the diagnostics of both velocity averages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub record: Record,
    pub forward: Average,
    pub backward: Average,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.species.validate()?;
        self.drive.validate()?;
        self.ensemble.validate()?;
        self.quadrature.validate()?;
        Geometry { direction: Direction::Forward, theta_deg: self.theta_deg }.validate()?;
        if self.drive.omega_p <= 0.0 {
            return Err(Error::Invalid("omega_p must be > 0 to define an absorption coefficient".into()));
        }
        Ok(())
    }

    /// Doppler-averaged absorption coefficient (1/m) for one probe direction.
    pub fn alpha(&self, direction: Direction) -> Result<(f64, Average)> {
        let geom = Geometry { direction, theta_deg: self.theta_deg };
        let avg = rho55_avg_with(&geom, &self.drive, &self.species, &self.ensemble, &self.quadrature, self.form)?;
        let alpha = absorption(avg.value, self.drive.omega_p, &self.species, self.ensemble.density)?;
        Ok((alpha, avg))
    }

    /// Forward and backward absorption at scan coordinate `x`.
    pub fn evaluate(&self, x: f64) -> Result<Evaluation> {
        let (af, forward) = self.alpha(Direction::Forward)?;
        let (ab, backward) = self.alpha(Direction::Backward)?;
        Ok(Evaluation { record: Record::from_alphas(x, af, ab, self.ensemble.length), forward, backward })
    }

    /// Reduced-model absorption of the zero-velocity class.
    pub fn alpha_at_rest_reduced(&self) -> Result<f64> {
        let pt = reduce(&self.drive, &self.species, &VelocityShifts::default())?;
        let rho55 = rho55_closed_form_with(&pt, self.form)?;
        absorption(rho55, self.drive.omega_p, &self.species, self.ensemble.density)
    }

    /// Five-level absorption of the zero-velocity class.
    pub fn alpha_at_rest_full(&self) -> Result<f64> {
        let prob = FiveLevelProblem::new(&self.drive, &self.species, &VelocityShifts::default());
        let rho = five_level_steady_state(&prob)?;
        alpha_tilde(rho.get(3, 1), self.drive.omega_p, &self.species, self.ensemble.density)
    }
}

/// Evaluates every `(x, scenario)` pair in parallel; output keeps input order.
pub fn run_sweep(points: &[(f64, Scenario)]) -> Result<Vec<Evaluation>> {
    points
        .par_iter()
        .map(|(x, sc)| {
            sc.evaluate(*x).map_err(|e| match e {
                Error::Singularity { what, velocity } => Error::Singularity { what: format!("{what} at x = {x}"), velocity },
                other => other,
            })
        })
        .collect()
}

/// Δc2 that puts the four-photon resonance at Δp = −Δa: Δc2 = −Δc1 + Δ2d.
pub fn four_photon_locked_delta_c2(drive: &DriveConfig) -> f64 {
    -drive.delta_c1 - drive.omega_c1 * drive.omega_c1 / drive.delta_c1
}

/// Δc2 solving Δc2 = −Δc1 − Δ5d(Δc2) + Δ2d by fixed-point iteration, which
/// also removes the light shift of |5⟩ from the two-photon resonance.
pub fn light_shift_locked_delta_c2(drive: &DriveConfig) -> Result<f64> {
    let d2d = -drive.omega_c1 * drive.omega_c1 / drive.delta_c1;
    let mut dc2 = -drive.delta_c1;
    for _ in 0..200 {
        let d5d = drive.omega_a * drive.omega_a / drive.delta_a + drive.omega_c2 * drive.omega_c2 / dc2;
        let next = -drive.delta_c1 - d5d + d2d;
        if (next - dc2).abs() <= 1e-12 * dc2.abs() {
            return Ok(next);
        }
        dc2 = next;
    }
    Err(Error::Numerical { rcond: f64::NAN })
}
