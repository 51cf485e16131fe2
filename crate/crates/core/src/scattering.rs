//! Differential cross section for a dyon scattered by a dual flux line.
//!
//! Closed form: `sin^2(pi alpha) / (2 pi k sin^2(phi/2))`, with
//! `alpha = theta / 2pi` in the vacuum configuration. The partial-wave sum
//! is an independent route to the same number: phase shifts
//! `delta_m = (pi/2)(|m| - |m - alpha|)` summed with a regularization, since
//! the raw series does not converge.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub const DEFAULT_FORWARD_CUTOFF: f64 = 1e-3;

/// Inputs for an angular scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringSpec {
    pub alpha_eff: f64,
    pub k: f64,
    pub angles: Vec<f64>,
    #[serde(default = "default_cutoff")]
    pub forward_cutoff: f64,
}

fn default_cutoff() -> f64 {
    DEFAULT_FORWARD_CUTOFF
}

impl ScatteringSpec {
    pub fn validate(&self) -> Result<()> {
        check_k(self.k)?;
        if !(self.forward_cutoff > 0.0 && self.forward_cutoff < PI) {
            return Err(domain("forward cutoff must lie in (0, pi)"));
        }
        self.angles
            .iter()
            .try_for_each(|&phi| check_angle(phi, self.forward_cutoff))
    }
}

fn check_k(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("wave number must be positive, got {k}")))
    }
}

/// `phi` must lie in `(0, 2pi)` and at least `cutoff` away from the forward
/// direction on either side.
pub fn check_angle(phi: f64, cutoff: f64) -> Result<()> {
    if !(phi > 0.0 && phi < TAU) {
        return Err(domain(format!(
            "scattering angle must lie in (0, 2pi), got {phi}"
        )));
    }
    if phi < cutoff || phi > TAU - cutoff {
        return Err(Error::ForwardDivergence { phi, cutoff });
    }
    Ok(())
}

/// `d sigma / d Omega = sin^2(theta/2) / (2 pi k sin^2(phi/2))`.
pub fn theta_cross_section(theta: f64, k: f64, phi: f64) -> Result<f64> {
    theta_cross_section_with_cutoff(theta, k, phi, DEFAULT_FORWARD_CUTOFF)
}

pub fn theta_cross_section_with_cutoff(theta: f64, k: f64, phi: f64, cutoff: f64) -> Result<f64> {
    check_k(k)?;
    check_angle(phi, cutoff)?;
    let num = (theta / 2.0).sin().powi(2);
    let den = TAU * k * (phi / 2.0).sin().powi(2);
    Ok(num / den)
}

/// Same cross section parameterized by the flux fraction `alpha`.
pub fn ab_cross_section(alpha_eff: f64, k: f64, phi: f64) -> Result<f64> {
    theta_cross_section(TAU * alpha_eff, k, phi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Summation {
    /// Damping `t^|m|`, evaluated at several `t < 1` and extrapolated to
    /// `t -> 1` by polynomial (Neville) extrapolation in `1 - t`.
    Abel,
    /// Fejer means `(1 - |m|/(M+1))`; first-order accurate in `1/M`.
    Cesaro,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialWaveOptions {
    pub m_max: usize,
    pub summation: Summation,
    /// Relative tolerance on the cross section for the convergence check.
    pub tolerance: f64,
    pub forward_cutoff: f64,
}

impl Default for PartialWaveOptions {
    fn default() -> Self {
        Self {
            m_max: 2000,
            summation: Summation::Abel,
            tolerance: 1e-4,
            forward_cutoff: DEFAULT_FORWARD_CUTOFF,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartialWaveResult {
    pub cross_section: f64,
    /// Scattering amplitude `f(phi)`.
    #[serde(skip)]
    pub amplitude: Complex64,
    /// Estimated relative error of `cross_section`.
    pub error_estimate: f64,
    /// `floor(alpha)`; integer flux scatters trivially.
    pub integer_part: i64,
    pub reduced_alpha: f64,
}

/// Number of damping parameters used for the Abel extrapolation.
const ABEL_NODES: usize = 6;
/// Spacing of the damping offsets `1 - t` relative to the smallest one.
const ABEL_SPACING: f64 = 0.25;
/// The smallest offset makes `t^M_max` fall below this.
const ABEL_TAIL: f64 = 1e-14;

/// `delta_m = (pi/2)(|m| - |m - alpha|)`.
pub fn flux_line_phase_shift(m: i64, alpha: f64) -> f64 {
    0.5 * PI * ((m.abs() as f64) - (m as f64 - alpha).abs())
}

pub fn partial_wave_cross_section(
    alpha_eff: f64,
    k: f64,
    phi: f64,
    opts: &PartialWaveOptions,
) -> Result<PartialWaveResult> {
    check_k(k)?;
    check_angle(phi, opts.forward_cutoff)?;
    if opts.m_max < 100 {
        return Err(domain(format!(
            "m_max must be at least 100, got {}",
            opts.m_max
        )));
    }
    if !alpha_eff.is_finite() {
        return Err(domain("alpha must be finite"));
    }
    let integer_part = alpha_eff.floor();
    let alpha = alpha_eff - integer_part;
    let m_max = opts.m_max as i64;

    // terms[i] = (exp(2 i delta_m) - 1) exp(i m phi) for m = i - M
    let terms: Vec<Complex64> = (-m_max..=m_max)
        .map(|m| {
            let shift = Complex64::from_polar(1.0, 2.0 * flux_line_phase_shift(m, alpha)) - 1.0;
            shift * Complex64::from_polar(1.0, m as f64 * phi)
        })
        .collect();

    let (sum, rel_err) = match opts.summation {
        Summation::Abel => abel_sum(&terms, opts.m_max),
        Summation::Cesaro => cesaro_sum(&terms, opts.m_max),
    };
    let prefactor = Complex64::from_polar((TAU * k).powf(-0.5), -FRAC_PI_4);
    let amplitude = prefactor * sum;
    let cross_section = amplitude.norm_sqr();
    // |S|^2 doubles the relative error of S
    let error_estimate = 2.0 * rel_err;
    if error_estimate > opts.tolerance {
        return Err(Error::NoConvergence {
            estimate: error_estimate,
            tolerance: opts.tolerance,
            alpha: alpha_eff,
            phi,
            m_max: opts.m_max,
        });
    }
    Ok(PartialWaveResult {
        cross_section,
        amplitude,
        error_estimate,
        integer_part: integer_part as i64,
        reduced_alpha: alpha,
    })
}

fn relative(diff: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / scale
    }
}

fn abel_sum(terms: &[Complex64], m_max: usize) -> (Complex64, f64) {
    let h0 = -ABEL_TAIL.ln() / m_max as f64;
    let offsets: Vec<f64> = (0..ABEL_NODES)
        .map(|j| h0 * (1.0 + ABEL_SPACING * j as f64))
        .collect();
    let centre = m_max;
    let damped: Vec<Complex64> = offsets
        .iter()
        .map(|&h| {
            let t = 1.0 - h;
            let mut acc = terms[centre];
            let mut tm = 1.0;
            for m in 1..=m_max {
                tm *= t;
                acc += (terms[centre + m] + terms[centre - m]) * tm;
            }
            acc
        })
        .collect();
    let best = neville_at_zero(&offsets, &damped);
    let lower = neville_at_zero(&offsets[..ABEL_NODES - 1], &damped[..ABEL_NODES - 1]);
    (best, relative((best - lower).norm(), best.norm()))
}

/// Polynomial through `(x_i, y_i)` evaluated at `x = 0`.
fn neville_at_zero(x: &[f64], y: &[Complex64]) -> Complex64 {
    let mut p = y.to_vec();
    let n = x.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (x[i], x[i + level]);
            p[i] = (p[i] * (-xj) + p[i + 1] * xi) / (xi - xj);
        }
    }
    p[0]
}

fn fejer_mean(terms: &[Complex64], centre: usize, n: usize) -> Complex64 {
    let mut acc = terms[centre];
    let denom = (n + 1) as f64;
    for m in 1..=n {
        let w = 1.0 - m as f64 / denom;
        acc += (terms[centre + m] + terms[centre - m]) * w;
    }
    acc
}

fn cesaro_sum(terms: &[Complex64], m_max: usize) -> (Complex64, f64) {
    let full = fejer_mean(terms, m_max, m_max);
    let half = fejer_mean(terms, m_max, m_max / 2);
    // the error of a Fejer mean falls like 1/N, so the half-order mean is
    // about twice as far off as the full one
    (full, relative((full - half).norm(), full.norm()))
}

/// One row of an angular scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub phi: f64,
    pub closed_form: f64,
    pub partial_wave: f64,
    pub rel_error: f64,
}

/// Closed form and partial-wave oracle over `spec.angles`, in parallel.
pub fn scan(spec: &ScatteringSpec, opts: &PartialWaveOptions) -> Result<Vec<ScanRow>> {
    use rayon::prelude::*;
    spec.validate()?;
    let opts = PartialWaveOptions {
        forward_cutoff: spec.forward_cutoff,
        ..*opts
    };
    spec.angles
        .par_iter()
        .map(|&phi| {
            let closed = theta_cross_section_with_cutoff(
                TAU * spec.alpha_eff,
                spec.k,
                phi,
                spec.forward_cutoff,
            )?;
            let pw = partial_wave_cross_section(spec.alpha_eff, spec.k, phi, &opts)?;
            let rel_error = relative((pw.cross_section - closed).abs(), closed.abs());
            Ok(ScanRow {
                phi,
                closed_form: closed,
                partial_wave: pw.cross_section,
                rel_error: if closed == 0.0 && pw.cross_section.abs() < 1e-15 {
                    0.0
                } else {
                    rel_error
                },
            })
        })
        .collect()
}
