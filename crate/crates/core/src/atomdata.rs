//! Physical constants, the atomic species description and thermal-ensemble
//! quantities.
//!
//! Rates, Rabi frequencies and detunings are ordinary frequencies in Hz
//! throughout the crate. Wavenumbers are stored as `1/λ`, so `k·v` is already
//! a frequency in Hz.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::units::{parse_quantity, Dimension};

/// Fixed CODATA 2018 values in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Boltzmann constant (J/K).
    pub boltzmann_k: f64,
    /// Reduced Planck constant (J·s).
    pub hbar: f64,
    /// Vacuum permittivity (F/m).
    pub epsilon0: f64,
    /// Atomic mass unit (kg).
    pub amu: f64,
}

impl PhysicalConstants {
    pub const CODATA: PhysicalConstants = PhysicalConstants {
        boltzmann_k: 1.380_649e-23,
        hbar: 1.054_571_817e-34,
        epsilon0: 8.854_187_812_8e-12,
        amu: 1.660_539_066_60e-27,
    };
}

/// Spontaneous decay channels of the five-level scheme (Hz).
///
/// `g31` is the rate from |3⟩ to |1⟩ and so on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRates {
    pub g31: f64,
    pub g32: f64,
    pub g41: f64,
    pub g42: f64,
    pub g53: f64,
    pub g54: f64,
}

/// Level-scheme data of one atomic species.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomSpecies {
    pub name: String,
    /// Atomic mass (kg).
    pub mass: f64,
    pub decay: DecayRates,
    /// Probe wavelength, |1⟩↔|3⟩ (m).
    pub lambda_p: f64,
    /// Assistant wavelength, |3⟩↔|5⟩ (m).
    pub lambda_a: f64,
    /// First coupling wavelength, |2⟩↔|4⟩ (m).
    pub lambda_c1: f64,
    /// Second coupling wavelength, |4⟩↔|5⟩ (m).
    pub lambda_c2: f64,
    /// Probe transition dipole moment d13 (C·m).
    pub d13: f64,
}

impl AtomSpecies {
    /// ⁸⁷Rb with |1⟩,|2⟩ = 5S₁/₂ F=1,2; |3⟩,|4⟩ = 5P₁/₂ F=1,2; |5⟩ = 7S₁/₂ F=2.
    pub fn rb87() -> Self {
        AtomSpecies {
            name: "rb87".to_string(),
            mass: 86.909_180_527 * PhysicalConstants::CODATA.amu,
            decay: DecayRates {
                g31: 5.75e6,
                g32: 5.75e6,
                g41: 5.75e6,
                g42: 5.75e6,
                g53: 0.19e6,
                g54: 0.19e6,
            },
            lambda_p: 795.0e-9,
            lambda_a: 728.7e-9,
            lambda_c1: 795.0e-9,
            lambda_c2: 728.7e-9,
            d13: 2.537e-29,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.decay;
        let rates = [d.g31, d.g32, d.g41, d.g42, d.g53, d.g54];
        if rates.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(Error::Invalid(format!("species {}: decay rates must be >= 0", self.name)));
        }
        let lambdas = [self.lambda_p, self.lambda_a, self.lambda_c1, self.lambda_c2];
        if lambdas.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(Error::Invalid(format!("species {}: wavelengths must be > 0", self.name)));
        }
        if !(self.mass > 0.0) {
            return Err(Error::Invalid(format!("species {}: mass must be > 0", self.name)));
        }
        if !(self.d13 > 0.0) {
            return Err(Error::Invalid(format!("species {}: d13 must be > 0", self.name)));
        }
        if d.g31 + d.g32 <= 0.0 || d.g41 + d.g42 <= 0.0 {
            return Err(Error::Invalid(format!(
                "species {}: intermediate states need a decay path to the ground states",
                self.name
            )));
        }
        Ok(())
    }

    /// Wavenumber `1/λ` of each field (p, a, c1, c2) in 1/m.
    pub fn wavenumbers(&self) -> [f64; 4] {
        [
            1.0 / self.lambda_p,
            1.0 / self.lambda_a,
            1.0 / self.lambda_c1,
            1.0 / self.lambda_c2,
        ]
    }

    /// Branching weights η53 = Γ53/(Γ31+Γ32) and η54 = Γ54/(Γ41+Γ42).
    pub fn eta(&self) -> (f64, f64) {
        let d = &self.decay;
        (d.g53 / (d.g31 + d.g32), d.g54 / (d.g41 + d.g42))
    }

    /// Effective decay rates Γ51 and Γ52 of the reduced three-level scheme.
    pub fn effective_decays(&self) -> (f64, f64) {
        let d = &self.decay;
        let (e53, e54) = self.eta();
        (d.g31 * e53 + d.g41 * e54, d.g32 * e53 + d.g42 * e54)
    }

    /// Loads a species from TOML text with explicit field names and units.
    ///
    /// ```toml
    /// name = "rb87"
    /// mass = "86.909 u"
    /// gamma_31 = "5.75 MHz"   # likewise gamma_32, gamma_41, gamma_42, gamma_53, gamma_54
    /// lambda_p = "795.0 nm"   # likewise lambda_a, lambda_c1, lambda_c2
    /// d13 = "2.537e-29 C m"
    /// ```
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: SpeciesFile =
            toml::from_str(text).map_err(|e| Error::Invalid(format!("species file: {e}")))?;
        raw.into_species()
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }
}

impl Default for AtomSpecies {
    fn default() -> Self {
        Self::rb87()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct SpeciesFile {
    name: Option<String>,
    mass: String,
    gamma_31: String,
    gamma_32: String,
    gamma_41: String,
    gamma_42: String,
    gamma_53: String,
    gamma_54: String,
    lambda_p: String,
    lambda_a: String,
    lambda_c1: String,
    lambda_c2: String,
    d13: String,
}

impl SpeciesFile {
    fn into_species(self) -> Result<AtomSpecies> {
        let f = |s: &str| parse_quantity(s, Dimension::Frequency);
        let l = |s: &str| parse_quantity(s, Dimension::Length);
        let species = AtomSpecies {
            name: self.name.unwrap_or_else(|| "custom".to_string()),
            mass: parse_quantity(&self.mass, Dimension::Mass)?,
            decay: DecayRates {
                g31: f(&self.gamma_31)?,
                g32: f(&self.gamma_32)?,
                g41: f(&self.gamma_41)?,
                g42: f(&self.gamma_42)?,
                g53: f(&self.gamma_53)?,
                g54: f(&self.gamma_54)?,
            },
            lambda_p: l(&self.lambda_p)?,
            lambda_a: l(&self.lambda_a)?,
            lambda_c1: l(&self.lambda_c1)?,
            lambda_c2: l(&self.lambda_c2)?,
            d13: parse_quantity(&self.d13, Dimension::DipoleMoment)?,
        };
        species.validate()?;
        Ok(species)
    }
}

/// Thermal vapour parameters in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    /// Temperature (K).
    pub temperature: f64,
    /// Number density (m⁻³).
    pub density: f64,
    /// Cell length (m).
    pub length: f64,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0) {
            return Err(Error::Invalid("temperature must be > 0".into()));
        }
        if !(self.density > 0.0) {
            return Err(Error::Invalid("density must be > 0".into()));
        }
        if !(self.length > 0.0) {
            return Err(Error::Invalid("length must be > 0".into()));
        }
        Ok(())
    }
}

/// Most probable speed √(2 k_B T / M) in m/s.
pub fn most_probable_speed(species: &AtomSpecies, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::Domain(format!("temperature must be positive, got {temperature} K")));
    }
    Ok((2.0 * PhysicalConstants::CODATA.boltzmann_k * temperature / species.mass).sqrt())
}

/// Doppler half width √(ln 2)·v_p/λ in Hz.
pub fn doppler_half_width(lambda: f64, v_p: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("wavelength must be positive, got {lambda} m")));
    }
    Ok(std::f64::consts::LN_2.sqrt() * v_p / lambda)
}
