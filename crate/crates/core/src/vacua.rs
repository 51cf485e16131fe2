//! States in the winding basis `|n>`, truncated to `n in [-M, M]`.
//!
//! Shift convention: one extra turn around the tube relabels `|n> -> |n+1>`,
//! i.e. `c'_{n+1} = c_n`. Under this convention the theta-vacuum is an
//! eigenvector of the shift with eigenvalue `exp(-i theta)` on interior
//! indices. Amplitude shifted past `+M` is dropped and accounted for in
//! [`WindingState::boundary_loss`].

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WindingState {
    m: i64,
    /// `amps[n + M]` holds `c_n`.
    amps: Vec<Complex64>,
    boundary_loss: f64,
}

impl WindingState {
    pub fn zeros(m: i64) -> Result<Self> {
        if m < 0 {
            return Err(domain(format!("truncation must be non-negative, got {m}")));
        }
        Ok(Self {
            m,
            amps: vec![Complex64::new(0.0, 0.0); (2 * m + 1) as usize],
            boundary_loss: 0.0,
        })
    }

    /// `|n>` with unit amplitude.
    pub fn delta(n: i64, m: i64) -> Result<Self> {
        let mut s = Self::zeros(m)?;
        if n.abs() > m {
            return Err(domain(format!(
                "winding {n} outside truncation [-{m}, {m}]"
            )));
        }
        s.amps[(n + m) as usize] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(m: i64, amps: Vec<Complex64>) -> Result<Self> {
        if m < 0 || amps.len() != (2 * m + 1) as usize {
            return Err(domain("amplitude count must be 2M + 1"));
        }
        Ok(Self {
            m,
            amps,
            boundary_loss: 0.0,
        })
    }

    pub fn truncation(&self) -> i64 {
        self.m
    }

    /// `c_n`, zero outside the window.
    pub fn amplitude(&self, n: i64) -> Complex64 {
        if n.abs() > self.m {
            Complex64::new(0.0, 0.0)
        } else {
            self.amps[(n + self.m) as usize]
        }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Total `|c|^2` pushed out of the window by shifts so far.
    pub fn boundary_loss(&self) -> f64 {
        self.boundary_loss
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `(n, re, im)` triples, the JSON export layout.
    pub fn entries(&self) -> Vec<(i64, f64, f64)> {
        self.amps
            .iter()
            .enumerate()
            .map(|(i, c)| (i as i64 - self.m, c.re, c.im))
            .collect()
    }
}

/// `exp(i n theta) exp(i phi theta / 2pi)`: phase of the dyon state with
/// winding `n` at azimuth `phi`.
pub fn dyon_state_factor(n: i64, theta: f64, phi: f64) -> Complex64 {
    let topological = Complex64::from_polar(1.0, n as f64 * theta);
    let local = Complex64::from_polar(1.0, phi * theta / std::f64::consts::TAU);
    topological * local
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaVacuum {
    theta: f64,
    state: WindingState,
}

impl ThetaVacuum {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn state(&self) -> &WindingState {
        &self.state
    }
}

/// `sum_{|n| <= M} exp(i n theta) |n>`, unnormalized unless `normalized`.
pub fn build_theta_vacuum(theta: f64, m: i64) -> Result<ThetaVacuum> {
    build_theta_vacuum_with(theta, m, false)
}

pub fn build_theta_vacuum_with(theta: f64, m: i64, normalized: bool) -> Result<ThetaVacuum> {
    if m < 1 {
        return Err(domain(format!(
            "theta-vacuum truncation must be >= 1, got {m}"
        )));
    }
    if !theta.is_finite() {
        return Err(domain("theta must be finite"));
    }
    // Consecutive amplitudes are generated by one complex multiplication so
    // that the ratio c_{n+1}/c_n is exp(i theta) to round-off, independent of
    // how large n*theta gets.
    let step = Complex64::from_polar(1.0, theta);
    let size = (2 * m + 1) as usize;
    let mut amps = vec![Complex64::new(1.0, 0.0); size];
    let centre = m as usize;
    for i in centre + 1..size {
        amps[i] = amps[i - 1] * step;
    }
    for i in (0..centre).rev() {
        amps[i] = amps[i + 1] * step.conj();
    }
    if normalized {
        let s = 1.0 / (size as f64).sqrt();
        amps.iter_mut().for_each(|c| *c *= s);
    }
    Ok(ThetaVacuum {
        theta,
        state: WindingState::from_amplitudes(m, amps)?,
    })
}

/// One extra turn: `c'_{n+1} = c_n`.
pub fn winding_shift(s: &WindingState) -> WindingState {
    let mut amps = vec![Complex64::new(0.0, 0.0); s.amps.len()];
    amps[1..].copy_from_slice(&s.amps[..s.amps.len() - 1]);
    WindingState {
        m: s.m,
        amps,
        boundary_loss: s.boundary_loss + s.amps[s.amps.len() - 1].norm_sqr(),
    }
}

/// `sum_n conj(a_n) b_n` over the union of both windows.
pub fn overlap(a: &WindingState, b: &WindingState) -> Complex64 {
    let m = a.m.min(b.m);
    (-m..=m)
        .map(|n| a.amplitude(n).conj() * b.amplitude(n))
        .sum()
}

/// Largest deviation from the shift eigen-relation on interior indices,
/// `max_{|n| < M} |shift(v)_n - exp(-i theta) v_n|`.
pub fn eigenvalue_residual(v: &ThetaVacuum) -> Result<f64> {
    let m = v.state.m;
    if m < 2 {
        return Err(domain("eigenvalue residual needs M >= 2"));
    }
    let shifted = winding_shift(&v.state);
    let eig = Complex64::from_polar(1.0, v.theta).conj();
    Ok((-m + 1..=m - 1)
        .map(|n| (shifted.amplitude(n) - eig * v.state.amplitude(n)).norm())
        .fold(0.0, f64::max))
}

/// Serializable view: `{"theta": .., "m": .., "amplitudes": [[n, re, im], ..]}`.
#[derive(Debug, Clone, Serialize)]
pub struct VacuumExport {
    pub theta: f64,
    pub m: i64,
    pub normalized: bool,
    pub amplitudes: Vec<(i64, f64, f64)>,
}

impl VacuumExport {
    pub fn new(v: &ThetaVacuum, normalized: bool) -> Self {
        Self {
            theta: v.theta,
            m: v.state.m,
            normalized,
            amplitudes: v.state.entries(),
        }
    }
}
