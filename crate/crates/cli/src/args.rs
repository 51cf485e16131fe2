use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use dyonlab_core::scattering::Summation;

#[derive(Debug, Parser)]
#[command(
    name = "dyonlab",
    version,
    about = "Topological phases of dyons around flux tubes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Write tabular output (profile, pattern, scan, state) as CSV.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,

    /// Include wall-clock time in the report.
    #[arg(long, global = true)]
    pub timing: bool,

    /// Fine-structure constant.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

/// Charges as Witten integers or raw values.
#[derive(Debug, Clone, Default, Args)]
pub struct ChargeArgs {
    /// Electric integer n_q.
    #[arg(long)]
    pub nq: Option<i64>,
    /// Magnetic integer n_g.
    #[arg(long)]
    pub ng: Option<i64>,
    /// Vacuum angle used with the integer charges.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Raw electric charge.
    #[arg(long)]
    pub q: Option<f64>,
    /// Raw magnetic charge.
    #[arg(long)]
    pub g: Option<f64>,
}

/// Tube fluxes as unit quanta, integers or raw values.
#[derive(Debug, Clone, Default, Args)]
pub struct FluxArgs {
    /// Unit magnetic and electric flux quanta.
    #[arg(long)]
    pub flux_quanta: bool,
    #[arg(long)]
    pub n_phi_e: Option<i64>,
    #[arg(long)]
    pub n_phi_m: Option<i64>,
    /// Vacuum angle for integer fluxes; defaults to the charge theta.
    #[arg(long)]
    pub flux_theta: Option<f64>,
    #[arg(long)]
    pub phi_m: Option<f64>,
    #[arg(long)]
    pub phi_e: Option<f64>,
    /// Tube radius.
    #[arg(long)]
    pub radius_eps: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ScatterArgs {
    /// Vacuum angle; sets alpha_eff = theta / 2 pi.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub alpha_eff: Option<f64>,
    /// Wave number.
    #[arg(long)]
    pub k: Option<f64>,
    /// Scattering angle; repeat for several.
    #[arg(long)]
    pub phi: Vec<f64>,
    /// Start of an evenly spaced angle range.
    #[arg(long, requires = "phi_max")]
    pub phi_min: Option<f64>,
    #[arg(long, requires = "phi_min")]
    pub phi_max: Option<f64>,
    /// Number of angles in the range.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub forward_cutoff: Option<f64>,
    /// Largest partial wave |m|.
    #[arg(long)]
    pub m_max: Option<usize>,
    /// `abel` or `cesaro`.
    #[arg(long, value_parser = parse_summation)]
    pub summation: Option<Summation>,
    /// Skip the partial-wave cross-check.
    #[arg(long)]
    pub no_partial_waves: bool,
}

fn parse_summation(s: &str) -> Result<Summation, String> {
    match s {
        "abel" => Ok(Summation::Abel),
        "cesaro" => Ok(Summation::Cesaro),
        _ => Err(format!("expected abel or cesaro, got '{s}'")),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Phase acquired by a dyon encircling a flux tube.
    Phase {
        #[command(flatten)]
        charges: ChargeArgs,
        #[command(flatten)]
        flux: FluxArgs,
        /// Winding number.
        #[arg(long)]
        n: Option<i64>,
    },
    /// Charges from integers, with an optional pairing check against a partner.
    Charges {
        #[command(flatten)]
        charges: ChargeArgs,
        /// Partner electric integer.
        #[arg(long)]
        nq2: Option<i64>,
        /// Partner magnetic integer.
        #[arg(long)]
        ng2: Option<i64>,
    },
    /// Tube fluxes, with the integer flux rule when charges are given.
    Flux {
        #[command(flatten)]
        flux: FluxArgs,
        #[command(flatten)]
        charges: ChargeArgs,
        #[arg(long)]
        n: Option<i64>,
    },
    /// Line integral of a pure-gauge field along a path.
    LoopIntegral {
        #[command(flatten)]
        charges: ChargeArgs,
        #[command(flatten)]
        flux: FluxArgs,
        /// CSV file with x,y columns.
        #[arg(long)]
        path: Option<PathBuf>,
        /// Treat the path as open.
        #[arg(long)]
        open: bool,
        /// `beta` or `dyon`.
        #[arg(long)]
        field: Option<String>,
        /// Quadrature step.
        #[arg(long)]
        step: Option<f64>,
    },
    /// Truncated theta vacuum and its shift eigenvalue residual.
    Vacuum {
        #[arg(long)]
        theta: Option<f64>,
        /// Truncation |n| <= m.
        #[arg(long)]
        m: Option<i64>,
        #[arg(long)]
        normalized: bool,
        /// Write the state as JSON.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Evolve a wave packet around the tube (needs an evolution block).
    Evolve {
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        alpha_eff: Option<f64>,
    },
    /// Two-path interference phase measured on the lattice.
    TwoPath {
        /// `reference` or `quick`.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        alpha_eff: Option<f64>,
        #[command(flatten)]
        charges: ChargeArgs,
        #[command(flatten)]
        flux: FluxArgs,
    },
    /// Two-slit fringe shift for a vacuum angle.
    Fringe {
        /// Slit-to-screen distance.
        #[arg(long = "L")]
        l: Option<f64>,
        /// Slit separation.
        #[arg(long)]
        d: Option<f64>,
        /// Slit width.
        #[arg(long)]
        w: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        /// Geometric offset in units of 2 pi.
        #[arg(long)]
        delta0_bar: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Scattering cross section off a tube.
    Scatter(ScatterArgs),
    /// Run the self-check suites.
    Check {
        /// `all` or a suite name.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        /// Use the reference two-path geometry.
        #[arg(long)]
        full: bool,
    },
}
