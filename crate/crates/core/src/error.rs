use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A potential or path was evaluated inside the excluded tube region.
    #[error("point ({x}, {y}) lies inside the flux tube (r = {r:.6e} < {radius:.6e})")]
    InsideTube { x: f64, y: f64, r: f64, radius: f64 },

    #[error("winding number requires a closed path")]
    OpenPath,

    #[error(
        "path sampled too coarsely: azimuth jump {jump:.4} rad at segment {segment} (must be < pi)"
    )]
    CoarsePath { segment: usize, jump: f64 },

    #[error(
        "forward-direction divergence: phi = {phi:.6e} is within {cutoff:.1e} rad of the 1/sin^2(phi/2) pole"
    )]
    ForwardDivergence { phi: f64, cutoff: f64 },

    #[error(
        "partial-wave sum did not converge: error estimate {estimate:.3e} exceeds tolerance {tolerance:.3e} (alpha = {alpha}, phi = {phi}, m_max = {m_max})"
    )]
    NoConvergence {
        estimate: f64,
        tolerance: f64,
        alpha: f64,
        phi: f64,
        m_max: usize,
    },

    #[error("flux tube center ({x}, {y}) coincides with a grid node")]
    TubeOnNode { x: f64, y: f64 },

    #[error(
        "numerical instability at step {step}: norm grew by {growth:.3e} (limit 1e-6 per step)"
    )]
    Instability { step: usize, growth: f64 },

    #[error("invalid run: {0}")]
    InvalidRun(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
