//! Gauge-coupled wave-packet evolution around an excluded flux tube, the
//! two-path interference experiment and the two-slit fringe shift.

pub mod field;
pub mod fringe;
pub mod grid;
pub mod links;
pub mod solver;
pub mod two_path;

pub use field::{Packet, WaveField};
pub use fringe::{fringe_shift, FringeResult, SlitGeometry};
pub use grid::Grid2D;
pub use links::{build_link_phases, links_for, plaquette_report, LinkPhases, PlaquetteReport};
pub use solver::{evolve, EvolveConfig, Evolver, RunStats, INSTABILITY_GROWTH};
pub use two_path::{two_path_phase, TwoPathExperiment, TwoPathGeometry, TwoPathResult};
