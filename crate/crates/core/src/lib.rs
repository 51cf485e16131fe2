//! Dyon topological phases in natural units (`hbar = c = 1`, `alpha = e^2`).
//!
//! Analytic calculators live in [`units`], [`phase`], [`gauge`], [`vacua`]
//! and [`scattering`]; [`dynamics`] holds the numerical wave-packet oracle.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod dynamics;
pub mod error;
pub mod gauge;
pub mod phase;
pub mod scattering;
pub mod units;
pub mod vacua;

pub use error::{Error, Result};
pub use gauge::{line_integral, vector_potentials, PlanePath, PlanePoint};
pub use phase::{dyon_phase, dyon_phase_split, effective_alpha, flux_rule_phase, PhaseResult};
pub use units::{flux_from_integers, witten_charges, DyonCharge, FluxTube, PhysicalConstants};
pub use vacua::{build_theta_vacuum, ThetaVacuum, WindingState};
