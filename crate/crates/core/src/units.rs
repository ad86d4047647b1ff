//! Parsing of physical quantities written as `<number> <unit>`.
//!
//! Every physical input in config and species files carries an explicit unit
//! suffix; bare numbers are rejected. Values are converted to SI (frequencies
//! to Hz, ordinary-frequency convention) at parse time.

use crate::error::{Error, Result};

/// Dimension of a quantity accepted by [`parse_quantity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Frequency,
    Length,
    Temperature,
    NumberDensity,
    Angle,
    Mass,
    DipoleMoment,
}

impl Dimension {
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Dimension::Frequency => &[("Hz", 1.0), ("kHz", 1e3), ("MHz", 1e6), ("GHz", 1e9)],
            Dimension::Length => &[
                ("nm", 1e-9),
                ("um", 1e-6),
                ("µm", 1e-6),
                ("mm", 1e-3),
                ("cm", 1e-2),
                ("m", 1.0),
            ],
            Dimension::Temperature => &[("K", 1.0), ("mK", 1e-3), ("uK", 1e-6), ("µK", 1e-6)],
            Dimension::NumberDensity => &[("cm^-3", 1e6), ("m^-3", 1.0)],
            Dimension::Angle => &[("deg", 1.0), ("°", 1.0)],
            Dimension::Mass => &[("u", crate::atomdata::PhysicalConstants::CODATA.amu), ("kg", 1.0)],
            Dimension::DipoleMoment => &[("C m", 1.0), ("C*m", 1.0), ("Cm", 1.0), ("C·m", 1.0)],
        }
    }

    /// Canonical unit used when writing quantities back out.
    pub fn canonical_unit(self) -> &'static str {
        match self {
            Dimension::Frequency => "MHz",
            Dimension::Length => "nm",
            Dimension::Temperature => "K",
            Dimension::NumberDensity => "cm^-3",
            Dimension::Angle => "deg",
            Dimension::Mass => "u",
            Dimension::DipoleMoment => "C m",
        }
    }

    /// Scale of the canonical unit in SI.
    pub fn canonical_scale(self) -> f64 {
        self.units()
            .iter()
            .find(|(u, _)| *u == self.canonical_unit())
            .map(|(_, s)| *s)
            .expect("canonical unit is listed")
    }
}

/// Parses `"50 MHz"`, `"-1002.5MHz"`, `"2.0e12 cm^-3"` into an SI value.
///
/// Angles stay in degrees.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64> {
    let s = text.trim();
    let split = s
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit()
                || c == '.'
                || c == '+'
                || c == '-'
                || ((c == 'e' || c == 'E') && s[i + c.len_utf8()..].starts_with(|n: char| n.is_ascii_digit() || n == '-' || n == '+')))
        })
        .map(|(i, _)| i)
        .unwrap_or(s.len());
    let (num, unit) = s.split_at(split);
    let unit = unit.trim();
    if unit.is_empty() {
        return Err(Error::Invalid(format!(
            "quantity `{s}` has no unit (expected one of {})",
            unit_list(dim)
        )));
    }
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::Invalid(format!("cannot parse number in `{s}`")))?;
    let scale = dim
        .units()
        .iter()
        .find(|(u, _)| *u == unit)
        .map(|(_, f)| *f)
        .ok_or_else(|| {
            Error::Invalid(format!(
                "unknown unit `{unit}` in `{s}` (expected one of {})",
                unit_list(dim)
            ))
        })?;
    if !value.is_finite() {
        return Err(Error::Invalid(format!("non-finite value in `{s}`")));
    }
    Ok(value * scale)
}

fn unit_list(dim: Dimension) -> String {
    dim.units().iter().map(|(u, _)| *u).collect::<Vec<_>>().join(", ")
}

/// Formats an SI value in the canonical unit of `dim`.
pub fn format_quantity(value: f64, dim: Dimension) -> String {
    format!("{} {}", value / dim.canonical_scale(), dim.canonical_unit())
}
