//! Run configuration: a TOML document with unit-suffixed quantities.
//!
//! ```toml
//! [species]
//! preset = "rb87"            # or file = "my_atom.toml", or the species fields inline
//!
//! [drive]
//! omega_p = "0.1 MHz"
//! omega_a = "50 MHz"
//! omega_c1 = "50 MHz"
//! omega_c2 = "50 MHz"
//! delta_p = "-1000 MHz"
//! delta_a = "1000 MHz"
//! delta_c1 = "1000 MHz"
//! delta_c2 = "-1002.5 MHz"   # or "four-photon" / "light-shift"
//! gamma_l = "0.05 MHz"
//! gamma_21 = "2.0 kHz"
//!
//! [ensemble]
//! temperature = "300 K"
//! density = "2.0e12 cm^-3"
//! length = "1.0 cm"
//!
//! [geometry]
//! theta = "180 deg"
//!
//! [sweep]
//! variable = "delta_p"
//! from = "-1010 MHz"
//! to = "-990 MHz"
//! points = 2001
//! link = [{ target = "delta_a", scale = -1.0, offset = "0 MHz" }]
//! ```
//!
//! Optional sections: `[model]`, `[quadrature]`, `[criteria]`, `[validate]`,
//! `[optimize]`, `[output]`. Every quantity is converted to SI on load.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nonrecip::doppler::InvalidClassPolicy;
use nonrecip::reduced::Rho55Form;
use nonrecip::scenario::{four_photon_locked_delta_c2, light_shift_locked_delta_c2, Scenario};
use nonrecip::units::{parse_quantity, Dimension};
use nonrecip::{AtomSpecies, DriveConfig, EnsembleConfig, QuadratureScheme, QuadratureSpec};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// A scalar parameter that can be swept, linked or optimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variable {
    DeltaP,
    DeltaA,
    DeltaC1,
    DeltaC2,
    OmegaP,
    OmegaA,
    OmegaC1,
    OmegaC2,
    GammaL,
    Gamma21,
    Theta,
    Temperature,
    Density,
    Length,
}

const ALL_VARIABLES: [Variable; 14] = [
    Variable::DeltaP,
    Variable::DeltaA,
    Variable::DeltaC1,
    Variable::DeltaC2,
    Variable::OmegaP,
    Variable::OmegaA,
    Variable::OmegaC1,
    Variable::OmegaC2,
    Variable::GammaL,
    Variable::Gamma21,
    Variable::Theta,
    Variable::Temperature,
    Variable::Density,
    Variable::Length,
];

impl Variable {
    pub fn name(self) -> &'static str {
        match self {
            Variable::DeltaP => "delta_p",
            Variable::DeltaA => "delta_a",
            Variable::DeltaC1 => "delta_c1",
            Variable::DeltaC2 => "delta_c2",
            Variable::OmegaP => "omega_p",
            Variable::OmegaA => "omega_a",
            Variable::OmegaC1 => "omega_c1",
            Variable::OmegaC2 => "omega_c2",
            Variable::GammaL => "gamma_l",
            Variable::Gamma21 => "gamma_21",
            Variable::Theta => "theta",
            Variable::Temperature => "temperature",
            Variable::Density => "density",
            Variable::Length => "length",
        }
    }

    pub fn dimension(self) -> Dimension {
        match self {
            Variable::Theta => Dimension::Angle,
            Variable::Temperature => Dimension::Temperature,
            Variable::Density => Dimension::NumberDensity,
            Variable::Length => Dimension::Length,
            _ => Dimension::Frequency,
        }
    }

    /// Unit used in output columns and reports, with its SI scale.
    pub fn display_unit(self) -> (&'static str, f64) {
        match self.dimension() {
            Dimension::Frequency => ("mhz", 1e6),
            Dimension::Angle => ("deg", 1.0),
            Dimension::Temperature => ("k", 1.0),
            Dimension::NumberDensity => ("per_cm3", 1e6),
            _ => ("cm", 1e-2),
        }
    }

    /// Column header, e.g. `delta_p_mhz` or `theta_deg`.
    pub fn column(self) -> String {
        format!("{}_{}", self.name(), self.display_unit().0)
    }

    pub fn to_display(self, si: f64) -> f64 {
        si / self.display_unit().1
    }

    pub fn get(self, sc: &Scenario) -> f64 {
        let d = &sc.drive;
        match self {
            Variable::DeltaP => d.delta_p,
            Variable::DeltaA => d.delta_a,
            Variable::DeltaC1 => d.delta_c1,
            Variable::DeltaC2 => d.delta_c2,
            Variable::OmegaP => d.omega_p,
            Variable::OmegaA => d.omega_a,
            Variable::OmegaC1 => d.omega_c1,
            Variable::OmegaC2 => d.omega_c2,
            Variable::GammaL => d.gamma_l,
            Variable::Gamma21 => d.gamma_21,
            Variable::Theta => sc.theta_deg,
            Variable::Temperature => sc.ensemble.temperature,
            Variable::Density => sc.ensemble.density,
            Variable::Length => sc.ensemble.length,
        }
    }

    pub fn set(self, sc: &mut Scenario, value: f64) {
        let d = &mut sc.drive;
        match self {
            Variable::DeltaP => d.delta_p = value,
            Variable::DeltaA => d.delta_a = value,
            Variable::DeltaC1 => d.delta_c1 = value,
            Variable::DeltaC2 => d.delta_c2 = value,
            Variable::OmegaP => d.omega_p = value,
            Variable::OmegaA => d.omega_a = value,
            Variable::OmegaC1 => d.omega_c1 = value,
            Variable::OmegaC2 => d.omega_c2 = value,
            Variable::GammaL => d.gamma_l = value,
            Variable::Gamma21 => d.gamma_21 = value,
            Variable::Theta => sc.theta_deg = value,
            Variable::Temperature => sc.ensemble.temperature = value,
            Variable::Density => sc.ensemble.density = value,
            Variable::Length => sc.ensemble.length = value,
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variable {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        ALL_VARIABLES
            .iter()
            .copied()
            .find(|v| v.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ALL_VARIABLES.iter().map(|v| v.name()).collect();
                CliError::Config(format!("unknown variable `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

/// How Δc2 follows the other detunings when it is not given as a number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaC2Lock {
    /// Δc2 = −Δc1 + Δ2d.
    FourPhoton,
    /// Δc2 = −Δc1 − Δ5d + Δ2d.
    LightShift,
}

impl DeltaC2Lock {
    pub fn apply(self, sc: &mut Scenario) -> Result<(), CliError> {
        sc.drive.delta_c2 = match self {
            DeltaC2Lock::FourPhoton => four_photon_locked_delta_c2(&sc.drive),
            DeltaC2Lock::LightShift => light_shift_locked_delta_c2(&sc.drive)?,
        };
        Ok(())
    }

    fn name(self) -> &'static str {
        match self {
            DeltaC2Lock::FourPhoton => "four-photon",
            DeltaC2Lock::LightShift => "light-shift",
        }
    }
}

/// `target = scale · variable + offset`, all in SI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub target: Variable,
    pub scale: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub variable: Variable,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub spacing: Spacing,
    pub links: Vec<Link>,
}

impl Sweep {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.points < 2 {
            return Err(CliError::Config(format!("sweep.points must be >= 2, got {}", self.points)));
        }
        if !(self.from.is_finite() && self.to.is_finite()) || self.from == self.to {
            return Err(CliError::Config(format!("sweep range of {} is empty", self.variable)));
        }
        if self.spacing == Spacing::Log && !(self.from > 0.0 && self.to > 0.0) {
            return Err(CliError::Config("log spacing needs a positive sweep range".into()));
        }
        for l in &self.links {
            if l.target == self.variable {
                return Err(CliError::Config(format!("{} cannot be linked to itself", l.target)));
            }
            if l.target.dimension() != self.variable.dimension() {
                return Err(CliError::Config(format!(
                    "link {} -> {} mixes dimensions",
                    self.variable, l.target
                )));
            }
            if !(l.scale.is_finite() && l.offset.is_finite()) {
                return Err(CliError::Config(format!("link to {} must be finite", l.target)));
            }
        }
        Ok(())
    }

    /// Sample values in increasing order.
    pub fn values(&self) -> Vec<f64> {
        let (lo, hi) = if self.from < self.to { (self.from, self.to) } else { (self.to, self.from) };
        let n = self.points;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => lo + (hi - lo) * t,
                    Spacing::Log => (lo.ln() + (hi.ln() - lo.ln()) * t).exp(),
                }
            })
            .collect()
    }
}

/// Thresholds for the isolation window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Criteria {
    pub ir_min_db: f64,
    pub il_max_db: f64,
}

impl Default for Criteria {
    fn default() -> Self {
        Criteria { ir_min_db: 20.0, il_max_db: 1.0 }
    }
}

/// Comparison of the reduced and five-level models at rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateSpec {
    /// When set, Δa = Δc1 = ratio·Ωa and Δc2 follows the light-shift lock.
    pub ratio: Option<f64>,
    /// Half width of the Δp window around −Δa.
    pub window: f64,
    pub points: usize,
    pub max_deviation: f64,
}

impl Default for ValidateSpec {
    fn default() -> Self {
        ValidateSpec { ratio: None, window: 200e6, points: 8001, max_deviation: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeParameter {
    pub variable: Variable,
    pub from: f64,
    pub to: f64,
    pub resolution: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeSpec {
    pub free: Vec<FreeParameter>,
    pub il_max_db: f64,
    pub grid: usize,
    pub max_cycles: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Config(format!("unknown output format `{other}` (csv or json)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// A fully resolved run, SI throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub base: Scenario,
    pub delta_c2_lock: Option<DeltaC2Lock>,
    pub sweep: Option<Sweep>,
    pub criteria: Criteria,
    pub validate: ValidateSpec,
    pub optimize: Option<OptimizeSpec>,
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn from_toml_str(text: &str, base_dir: Option<&Path>) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        raw.resolve(base_dir)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text, path.parent())
    }

    /// Checks everything that does not require evaluating the model.
    pub fn validate(&self) -> Result<(), CliError> {
        let mut probe = self.base.clone();
        if let Some(lock) = self.delta_c2_lock {
            lock.apply(&mut probe)?;
        }
        probe.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        let c = &self.criteria;
        if !(c.il_max_db > 0.0) || !c.ir_min_db.is_finite() {
            return Err(CliError::Config("criteria need il_max > 0 dB and a finite ir_min".into()));
        }
        Ok(())
    }

    /// Scenario at one sweep value with links and the Δc2 lock applied.
    pub fn scenario_at(&self, variable: Variable, value: f64, links: &[Link]) -> Result<Scenario, CliError> {
        let mut sc = self.base.clone();
        variable.set(&mut sc, value);
        for l in links {
            l.target.set(&mut sc, l.scale * value + l.offset);
        }
        if let Some(lock) = self.delta_c2_lock {
            if variable != Variable::DeltaC2 && links.iter().all(|l| l.target != Variable::DeltaC2) {
                lock.apply(&mut sc)?;
            }
        }
        Ok(sc)
    }

    /// The base scenario with the Δc2 lock applied.
    pub fn locked_base(&self) -> Result<Scenario, CliError> {
        let mut sc = self.base.clone();
        if let Some(lock) = self.delta_c2_lock {
            lock.apply(&mut sc)?;
        }
        Ok(sc)
    }

    /// SHA-256 over a canonical rendering of every physical input.
    ///
    /// Output paths and formats are excluded so that the hash identifies the
    /// computation, not where it was written.
    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.canonical().as_bytes());
        hex::encode(h.finalize())
    }

    fn canonical(&self) -> String {
        let s = &self.base;
        let sp = &s.species;
        let d = &s.drive;
        let q = &s.quadrature;
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        let e = |x: f64| format!("{x:e}");
        put("species.name", sp.name.clone());
        put("species.mass", e(sp.mass));
        let dr = &sp.decay;
        for (k, v) in [("g31", dr.g31), ("g32", dr.g32), ("g41", dr.g41), ("g42", dr.g42), ("g53", dr.g53), ("g54", dr.g54)] {
            put(&format!("species.{k}"), e(v));
        }
        for (k, v) in [
            ("lambda_p", sp.lambda_p),
            ("lambda_a", sp.lambda_a),
            ("lambda_c1", sp.lambda_c1),
            ("lambda_c2", sp.lambda_c2),
            ("d13", sp.d13),
        ] {
            put(&format!("species.{k}"), e(v));
        }
        for v in ALL_VARIABLES {
            put(v.name(), e(v.get(s)));
        }
        put("validity_ratio", e(d.validity_ratio));
        put("rho55", format!("{:?}", s.form));
        put("delta_c2_lock", self.delta_c2_lock.map_or("none", |l| l.name()).to_string());
        put(
            "quadrature",
            format!("{:?} span={} nodes={} tol={:e} invalid={:?}", q.scheme, e(q.span), q.nodes, q.tolerance, q.invalid_classes),
        );
        if let Some(sw) = &self.sweep {
            put(
                "sweep",
                format!("{} {} {} {} {:?}", sw.variable, e(sw.from), e(sw.to), sw.points, sw.spacing),
            );
            for l in &sw.links {
                put("link", format!("{} {} {}", l.target, e(l.scale), e(l.offset)));
            }
        }
        put("criteria", format!("{} {}", e(self.criteria.ir_min_db), e(self.criteria.il_max_db)));
        let v = &self.validate;
        put(
            "validate",
            format!("{:?} {} {} {}", v.ratio.map(e), e(v.window), v.points, e(v.max_deviation)),
        );
        if let Some(o) = &self.optimize {
            for f in &o.free {
                put("free", format!("{} {} {} {}", f.variable, e(f.from), e(f.to), e(f.resolution)));
            }
            put("optimize", format!("{} {} {}", e(o.il_max_db), o.grid, o.max_cycles));
        }
        out
    }
}

fn quantity(field: &str, text: &str, dim: Dimension) -> Result<f64, CliError> {
    parse_quantity(text, dim).map_err(|e| CliError::Config(format!("{field}: {e}")))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    species: Option<toml::Table>,
    #[serde(default)]
    model: RawModel,
    drive: RawDrive,
    ensemble: RawEnsemble,
    geometry: RawGeometry,
    #[serde(default)]
    quadrature: RawQuadrature,
    sweep: Option<RawSweep>,
    #[serde(default)]
    criteria: RawCriteria,
    #[serde(default)]
    validate: RawValidate,
    optimize: Option<RawOptimize>,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    rho55: Option<String>,
    validity_ratio: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDrive {
    omega_p: String,
    omega_a: String,
    omega_c1: String,
    omega_c2: String,
    delta_p: String,
    delta_a: String,
    delta_c1: String,
    delta_c2: String,
    gamma_l: String,
    gamma_21: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnsemble {
    temperature: String,
    density: String,
    length: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    theta: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuadrature {
    scheme: Option<String>,
    span: Option<f64>,
    nodes: Option<usize>,
    tolerance: Option<f64>,
    invalid_classes: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    target: String,
    scale: f64,
    offset: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    variable: String,
    from: String,
    to: String,
    points: Option<usize>,
    spacing: Option<String>,
    #[serde(default)]
    link: Vec<RawLink>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCriteria {
    ir_min_db: Option<f64>,
    il_max_db: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawValidate {
    ratio: Option<f64>,
    window: Option<String>,
    points: Option<usize>,
    max_deviation: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFree {
    variable: String,
    from: String,
    to: String,
    resolution: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptimize {
    free: Vec<RawFree>,
    il_max_db: Option<f64>,
    grid: Option<usize>,
    max_cycles: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<PathBuf>,
    format: Option<String>,
}

fn resolve_species(table: Option<toml::Table>, base_dir: Option<&Path>) -> Result<AtomSpecies, CliError> {
    let Some(mut t) = table else { return Ok(AtomSpecies::rb87()) };
    let species = if let Some(p) = t.remove("preset") {
        if !t.is_empty() {
            return Err(CliError::Config("species.preset cannot be combined with other species fields".into()));
        }
        match p.as_str() {
            Some("rb87") => AtomSpecies::rb87(),
            _ => return Err(CliError::Config(format!("unknown species preset {p} (available: rb87)"))),
        }
    } else if let Some(f) = t.remove("file") {
        if !t.is_empty() {
            return Err(CliError::Config("species.file cannot be combined with other species fields".into()));
        }
        let f = f.as_str().ok_or_else(|| CliError::Config("species.file must be a string".into()))?;
        let path = base_dir.map_or_else(|| PathBuf::from(f), |d| d.join(f));
        AtomSpecies::from_file(&path).map_err(|e| CliError::Config(e.to_string()))?
    } else {
        AtomSpecies::from_toml_str(&t.to_string()).map_err(|e| CliError::Config(e.to_string()))?
    };
    Ok(species)
}

impl RawConfig {
    fn resolve(self, base_dir: Option<&Path>) -> Result<RunConfig, CliError> {
        let species = resolve_species(self.species, base_dir)?;
        let f = |field: &str, s: &str| quantity(&format!("drive.{field}"), s, Dimension::Frequency);
        let r = &self.drive;
        let delta_c2_lock = match r.delta_c2.trim() {
            "four-photon" => Some(DeltaC2Lock::FourPhoton),
            "light-shift" => Some(DeltaC2Lock::LightShift),
            _ => None,
        };
        let drive = DriveConfig {
            omega_p: f("omega_p", &r.omega_p)?,
            omega_a: f("omega_a", &r.omega_a)?,
            omega_c1: f("omega_c1", &r.omega_c1)?,
            omega_c2: f("omega_c2", &r.omega_c2)?,
            delta_p: f("delta_p", &r.delta_p)?,
            delta_a: f("delta_a", &r.delta_a)?,
            delta_c1: f("delta_c1", &r.delta_c1)?,
            delta_c2: if delta_c2_lock.is_some() { 0.0 } else { f("delta_c2", &r.delta_c2)? },
            gamma_l: f("gamma_l", &r.gamma_l)?,
            gamma_21: f("gamma_21", &r.gamma_21)?,
            validity_ratio: self.model.validity_ratio.unwrap_or(10.0),
        };
        let form = match self.model.rho55.as_deref() {
            None | Some("derived") => Rho55Form::Derived,
            Some("published") => Rho55Form::Published,
            Some(other) => return Err(CliError::Config(format!("model.rho55: unknown form `{other}` (derived or published)"))),
        };
        let ensemble = EnsembleConfig {
            temperature: quantity("ensemble.temperature", &self.ensemble.temperature, Dimension::Temperature)?,
            density: quantity("ensemble.density", &self.ensemble.density, Dimension::NumberDensity)?,
            length: quantity("ensemble.length", &self.ensemble.length, Dimension::Length)?,
        };
        let theta_deg = quantity("geometry.theta", &self.geometry.theta, Dimension::Angle)?;

        let dq = QuadratureSpec::default();
        let rq = &self.quadrature;
        let quadrature = QuadratureSpec {
            scheme: match rq.scheme.as_deref() {
                None | Some("trapezoid") => QuadratureScheme::Trapezoid,
                Some("adaptive") => QuadratureScheme::Adaptive,
                Some(other) => return Err(CliError::Config(format!("quadrature.scheme: unknown `{other}` (trapezoid or adaptive)"))),
            },
            span: rq.span.unwrap_or(dq.span),
            nodes: rq.nodes.unwrap_or(dq.nodes),
            tolerance: rq.tolerance.unwrap_or(dq.tolerance),
            invalid_classes: match rq.invalid_classes.as_deref() {
                None | Some("exclude") => InvalidClassPolicy::Exclude,
                Some("error") => InvalidClassPolicy::Error,
                Some(other) => return Err(CliError::Config(format!("quadrature.invalid_classes: unknown `{other}` (exclude or error)"))),
            },
        };

        let sweep = self.sweep.map(resolve_sweep).transpose()?;
        let criteria = Criteria {
            ir_min_db: self.criteria.ir_min_db.unwrap_or(20.0),
            il_max_db: self.criteria.il_max_db.unwrap_or(1.0),
        };
        let dv = ValidateSpec::default();
        let validate = ValidateSpec {
            ratio: self.validate.ratio,
            window: match &self.validate.window {
                Some(w) => quantity("validate.window", w, Dimension::Frequency)?,
                None => dv.window,
            },
            points: self.validate.points.unwrap_or(dv.points),
            max_deviation: self.validate.max_deviation.unwrap_or(dv.max_deviation),
        };
        if validate.ratio.is_some_and(|r| !(r > 0.0)) || validate.points < 2 || !(validate.window > 0.0) {
            return Err(CliError::Config("validate needs ratio > 0, window > 0 and at least 2 points".into()));
        }
        let optimize = self.optimize.map(|o| resolve_optimize(o, criteria)).transpose()?;
        let output = OutputSpec {
            path: self.output.path,
            format: self.output.format.as_deref().map(Format::from_str).transpose()?.unwrap_or(Format::Csv),
        };

        let cfg = RunConfig {
            base: Scenario { species, drive, ensemble, theta_deg, quadrature, form },
            delta_c2_lock,
            sweep,
            criteria,
            validate,
            optimize,
            output,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn resolve_sweep(raw: RawSweep) -> Result<Sweep, CliError> {
    let variable: Variable = raw.variable.parse()?;
    let dim = variable.dimension();
    let links = raw
        .link
        .into_iter()
        .map(|l| {
            let target: Variable = l.target.parse()?;
            Ok(Link { target, scale: l.scale, offset: quantity("sweep.link.offset", &l.offset, target.dimension())? })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let sweep = Sweep {
        variable,
        from: quantity("sweep.from", &raw.from, dim)?,
        to: quantity("sweep.to", &raw.to, dim)?,
        points: raw.points.unwrap_or(2001),
        spacing: match raw.spacing.as_deref() {
            None | Some("linear") => Spacing::Linear,
            Some("log") => Spacing::Log,
            Some(other) => return Err(CliError::Config(format!("sweep.spacing: unknown `{other}` (linear or log)"))),
        },
        links,
    };
    sweep.validate()?;
    Ok(sweep)
}

fn resolve_optimize(raw: RawOptimize, criteria: Criteria) -> Result<OptimizeSpec, CliError> {
    if raw.free.is_empty() {
        return Err(CliError::Config("optimize.free needs at least one parameter".into()));
    }
    let free = raw
        .free
        .into_iter()
        .map(|f| {
            let variable: Variable = f.variable.parse()?;
            let dim = variable.dimension();
            let p = FreeParameter {
                variable,
                from: quantity("optimize.free.from", &f.from, dim)?,
                to: quantity("optimize.free.to", &f.to, dim)?,
                resolution: quantity("optimize.free.resolution", &f.resolution, dim)?,
            };
            if !(p.to >= p.from) || !(p.resolution > 0.0) {
                return Err(CliError::Config(format!("optimize.free {variable}: need from <= to and resolution > 0")));
            }
            Ok(p)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(OptimizeSpec {
        free,
        il_max_db: raw.il_max_db.unwrap_or(criteria.il_max_db),
        grid: raw.grid.unwrap_or(9),
        max_cycles: raw.max_cycles.unwrap_or(8),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[drive]
omega_p = "0.1 MHz"
omega_a = "50 MHz"
omega_c1 = "50 MHz"
omega_c2 = "50 MHz"
delta_p = "-1000 MHz"
delta_a = "1000 MHz"
delta_c1 = "1000 MHz"
delta_c2 = "-1002.5 MHz"
gamma_l = "0.05 MHz"
gamma_21 = "2.0 kHz"

[ensemble]
temperature = "300 K"
density = "2.0e12 cm^-3"
length = "1.0 cm"

[geometry]
theta = "180 deg"
"#;

    #[test]
    fn minimal_config_resolves_to_si() {
        let c = RunConfig::from_toml_str(MINIMAL, None).unwrap();
        assert_eq!(c.base.drive.delta_c2, -1002.5e6);
        assert_eq!(c.base.drive.gamma_21, 2e3);
        assert_eq!(c.base.ensemble.density, 2e18);
        assert_eq!(c.base.ensemble.length, 1e-2);
        assert_eq!(c.base.theta_deg, 180.0);
        assert_eq!(c.base.species, AtomSpecies::rb87());
        assert_eq!(c.base.quadrature, QuadratureSpec::default());
        assert!(c.sweep.is_none());
    }

    #[test]
    fn unitless_quantity_is_rejected_with_field_name() {
        let text = MINIMAL.replace("omega_a = \"50 MHz\"", "omega_a = \"50\"");
        let err = RunConfig::from_toml_str(&text, None).unwrap_err();
        assert!(err.to_string().contains("drive.omega_a"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = MINIMAL.replace("[geometry]", "[geometry]\nphi = \"3 deg\"");
        assert!(RunConfig::from_toml_str(&text, None).is_err());
    }

    #[test]
    fn empty_sweep_range_is_rejected() {
        let text = format!("{MINIMAL}\n[sweep]\nvariable = \"delta_p\"\nfrom = \"-1000 MHz\"\nto = \"-1000 MHz\"\n");
        let err = RunConfig::from_toml_str(&text, None).unwrap_err();
        assert!(err.to_string().contains("empty"), "{err}");
    }

    #[test]
    fn links_and_locks_apply_per_point() {
        let text = MINIMAL.replace("delta_c2 = \"-1002.5 MHz\"", "delta_c2 = \"four-photon\"")
            + "\n[sweep]\nvariable = \"delta_p\"\nfrom = \"-1200 MHz\"\nto = \"-800 MHz\"\npoints = 5\nlink = [{ target = \"delta_a\", scale = -1.0, offset = \"0 MHz\" }]\n";
        let c = RunConfig::from_toml_str(&text, None).unwrap();
        let sw = c.sweep.clone().unwrap();
        assert_eq!(sw.values(), vec![-1200e6, -1100e6, -1000e6, -900e6, -800e6]);
        let sc = c.scenario_at(sw.variable, -900e6, &sw.links).unwrap();
        assert_eq!(sc.drive.delta_a, 900e6);
        assert!((sc.drive.delta_c2 + 1002.5e6).abs() < 1e-6);
    }

    #[test]
    fn log_sweep_is_geometric() {
        let s = Sweep { variable: Variable::Temperature, from: 1.0, to: 100.0, points: 3, spacing: Spacing::Log, links: vec![] };
        let v = s.values();
        assert!((v[1] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn hash_ignores_output_and_tracks_physics() {
        let a = RunConfig::from_toml_str(MINIMAL, None).unwrap();
        let mut b = a.clone();
        b.output.path = Some(PathBuf::from("elsewhere.csv"));
        assert_eq!(a.config_hash(), b.config_hash());
        b.base.drive.omega_a *= 1.0 + 1e-12;
        assert_ne!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash().len(), 64);
    }

    #[test]
    fn inline_species_table() {
        let text = format!(
            "[species]\nname = \"test\"\nmass = \"86.909 u\"\ngamma_31 = \"5.75 MHz\"\ngamma_32 = \"0.0 MHz\"\ngamma_41 = \"0.0 MHz\"\ngamma_42 = \"6.07 MHz\"\ngamma_53 = \"0.66 MHz\"\ngamma_54 = \"0.0 MHz\"\nlambda_p = \"795.0 nm\"\nlambda_a = \"728.7 nm\"\nlambda_c1 = \"780.2 nm\"\nlambda_c2 = \"776.0 nm\"\nd13 = \"2.537e-29 C m\"\n{MINIMAL}"
        );
        let c = RunConfig::from_toml_str(&text, None).unwrap();
        assert_eq!(c.base.species.name, "test");
    }
}
