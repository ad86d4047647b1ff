//! Direction-dependent probe absorption in thermal five-level Λ atoms.
//!
//! The far-detuned five-level scheme is reduced to an effective three-level
//! Λ system driven on two-photon transitions. Velocity-dependent detunings
//! are averaged over a Maxwell distribution for forward and backward probes,
//! and the resulting absorption is turned into transmissivity, isolation
//! ratio and insertion loss. A full five-level steady-state solver checks
//! the reduction.

pub mod atomdata;
pub mod doppler;
pub mod error;
pub mod fulldm;
pub mod liouville;
pub mod observables;
pub mod quadrature;
pub mod reduced;
pub mod scenario;
pub mod tradeoff;
pub mod units;

pub use atomdata::{AtomSpecies, EnsembleConfig, PhysicalConstants};
pub use doppler::{Direction, Geometry, QuadratureScheme, QuadratureSpec, VelocityShifts};
pub use error::{Error, Result};
pub use reduced::{DriveConfig, ReducedPoint};
