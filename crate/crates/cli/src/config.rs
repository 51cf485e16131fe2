//! JSON run configuration. Every block rejects unknown keys; command-line
//! flags override values read from a file.

use std::fs;
use std::path::{Path, PathBuf};

use dyonlab_core::dynamics::{Packet, SlitGeometry, TwoPathGeometry};
use dyonlab_core::scattering::Summation;
use serde::{Deserialize, Serialize};

/// Version of the configuration schema in `docs/config-schema.json`.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Must equal [`SCHEMA_VERSION`] when present.
    pub schema_version: Option<u32>,
    pub seed: Option<u64>,
    /// Fine-structure constant.
    pub alpha: Option<f64>,
    pub charges: Option<ChargesBlock>,
    /// Second dyon for pairing checks; shares the first dyon's theta.
    pub partner: Option<ChargesBlock>,
    pub fluxes: Option<FluxBlock>,
    /// Winding number of the path around the tube.
    pub winding: Option<i64>,
    pub path: Option<PathBlock>,
    pub vacuum: Option<VacuumBlock>,
    pub evolution: Option<EvolutionBlock>,
    pub two_path: Option<TwoPathBlock>,
    pub slits: Option<SlitGeometry>,
    pub scattering: Option<ScatteringBlock>,
    pub check: Option<CheckBlock>,
    pub output: Option<OutputBlock>,
}

/// Either Witten integers `(n_q, n_g, theta)` or raw charges `(q, g)`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargesBlock {
    pub n_q: Option<i64>,
    pub n_g: Option<i64>,
    pub theta: Option<f64>,
    pub q: Option<f64>,
    pub g: Option<f64>,
}

/// One of: `quanta: true`, integers `(n_phi_e, n_phi_m)` with optional
/// `theta`, or raw `(phi_m, phi_e)`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxBlock {
    pub quanta: Option<bool>,
    pub n_phi_e: Option<i64>,
    pub n_phi_m: Option<i64>,
    pub theta: Option<f64>,
    pub phi_m: Option<f64>,
    pub phi_e: Option<f64>,
    pub radius_eps: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathBlock {
    /// CSV file with `x,y` columns.
    pub csv: Option<PathBuf>,
    pub points: Option<Vec<[f64; 2]>>,
    /// Closed paths must end at their first point; defaults to true.
    pub closed: Option<bool>,
    /// `beta` (needs theta) or `dyon` (needs charges and fluxes).
    pub field: Option<String>,
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VacuumBlock {
    pub theta: Option<f64>,
    pub m: Option<i64>,
    pub normalized: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionBlock {
    pub n: usize,
    pub dx: f64,
    pub radius_eps: f64,
    pub mass: f64,
    pub dt: f64,
    pub steps: usize,
    #[serde(default)]
    pub absorb_margin: usize,
    pub packet: Packet,
    /// Coupling to the tube; overrides charges and fluxes when set.
    pub alpha_eff: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoPathBlock {
    /// `reference` or `quick`; ignored when `geometry` is given.
    pub preset: Option<String>,
    pub geometry: Option<TwoPathGeometry>,
    pub alpha_eff: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatteringBlock {
    pub theta: Option<f64>,
    pub alpha_eff: Option<f64>,
    pub k: Option<f64>,
    pub angles: Option<Vec<f64>>,
    pub m_max: Option<usize>,
    pub summation: Option<Summation>,
    pub forward_cutoff: Option<f64>,
    /// Also evaluate the partial-wave sum; defaults to true.
    pub partial_waves: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckBlock {
    pub suite: Option<String>,
    pub samples: Option<usize>,
    pub full: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        if let Some(v) = cfg.schema_version {
            if v != SCHEMA_VERSION {
                return Err(format!(
                    "{}: schema_version {v} is not supported (expected {SCHEMA_VERSION})",
                    path.display()
                ));
            }
        }
        Ok(cfg)
    }
}
