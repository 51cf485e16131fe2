use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::Grid2D;
use crate::error::{domain, Result};

/// Gaussian packet `exp(-|r - c|^2 / (4 sigma^2) + i k.r)`; `sigma` is the
/// standard deviation of `|psi|^2` along each axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Packet {
    pub center: [f64; 2],
    pub sigma: f64,
    pub k: [f64; 2],
}

/// Complex amplitude on every node of a grid; excluded nodes hold zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    grid: Arc<Grid2D>,
    data: Vec<Complex64>,
}

impl WaveField {
    pub fn zeros(grid: Arc<Grid2D>) -> Self {
        let data = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self { grid, data }
    }

    pub fn from_fn(grid: Arc<Grid2D>, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut w = Self::zeros(grid);
        for j in 0..w.grid.ny {
            for i in 0..w.grid.nx {
                let k = w.grid.index(i, j);
                if !w.grid.is_excluded(k) {
                    w.data[k] = f(i, j);
                }
            }
        }
        w
    }

    /// Normalized Gaussian packet.
    pub fn gaussian(grid: Arc<Grid2D>, p: &Packet) -> Result<Self> {
        if !(p.sigma > 0.0) {
            return Err(domain(format!(
                "packet width must be positive, got {}",
                p.sigma
            )));
        }
        let dx = grid.dx;
        let mut w = Self::from_fn(grid, |i, j| {
            let x = i as f64 * dx;
            let y = j as f64 * dx;
            let (rx, ry) = (x - p.center[0], y - p.center[1]);
            let env = (-(rx * rx + ry * ry) / (4.0 * p.sigma * p.sigma)).exp();
            Complex64::from_polar(env, p.k[0] * x + p.k[1] * y)
        });
        w.normalize()?;
        Ok(w)
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[self.grid.index(i, j)]
    }

    /// `sum |psi|^2 dx^2`.
    pub fn norm(&self) -> f64 {
        let cell = self.grid.dx * self.grid.dx;
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>() * cell
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(domain("cannot normalize a zero or non-finite field"));
        }
        let s = 1.0 / n.sqrt();
        self.data.iter_mut().for_each(|c| *c *= s);
        Ok(())
    }

    /// `sum |psi|^2 dx^2` over the given node indices.
    pub fn probability_in(&self, nodes: &[usize]) -> f64 {
        let cell = self.grid.dx * self.grid.dx;
        nodes.iter().map(|&k| self.data[k].norm_sqr()).sum::<f64>() * cell
    }

    /// Multiply by `exp(i lambda)` node by node.
    pub fn apply_phase(&mut self, lambda: &[f64]) {
        for (c, &l) in self.data.iter_mut().zip(lambda) {
            *c *= Complex64::from_polar(1.0, l);
        }
    }

    pub fn add(&self, other: &WaveField) -> WaveField {
        WaveField {
            grid: self.grid.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// `<self|other>` restricted to nodes where `window` is true.
    pub fn inner_in(&self, other: &WaveField, window: &[bool]) -> Complex64 {
        let cell = self.grid.dx * self.grid.dx;
        self.data
            .iter()
            .zip(&other.data)
            .zip(window)
            .filter(|(_, w)| **w)
            .map(|((a, b), _)| a.conj() * b)
            .sum::<Complex64>()
            * cell
    }

    /// Mean position and per-axis variance of `|psi|^2`.
    pub fn moments(&self) -> ([f64; 2], [f64; 2]) {
        let g = &self.grid;
        let (mut w, mut sx, mut sy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for j in 0..g.ny {
            for i in 0..g.nx {
                let p = self.at(i, j).norm_sqr();
                let (x, y) = (i as f64 * g.dx, j as f64 * g.dx);
                w += p;
                sx += p * x;
                sy += p * y;
                sxx += p * x * x;
                syy += p * y * y;
            }
        }
        let (mx, my) = (sx / w, sy / w);
        ([mx, my], [sxx / w - mx * mx, syy / w - my * my])
    }

    /// Rows of `(x, y, re, im)`.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        let g = &self.grid;
        (0..g.ny).flat_map(move |j| {
            (0..g.nx).map(move |i| {
                let c = self.at(i, j);
                (i as f64 * g.dx, j as f64 * g.dx, c.re, c.im)
            })
        })
    }
}
