use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::gauge::PlanePoint;

/// Square lattice with node `(i, j)` at `(i dx, j dx)` and a flux tube whose
/// axis sits inside one plaquette. Nodes closer than `radius_eps` to the
/// axis are excluded (hard wall).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub tube_center: [f64; 2],
    pub radius_eps: f64,
    #[serde(skip)]
    excluded: Vec<bool>,
}

fn smooth_size(n: usize) -> bool {
    if n < 4 {
        return false;
    }
    let mut m = n;
    for p in [2, 3, 5, 7] {
        while m % p == 0 {
            m /= p;
        }
    }
    m == 1
}

impl Grid2D {
    pub fn new(
        nx: usize,
        ny: usize,
        dx: f64,
        tube_center: PlanePoint,
        radius_eps: f64,
    ) -> Result<Self> {
        if !smooth_size(nx) || !smooth_size(ny) {
            return Err(domain(format!(
                "grid sizes must be products of 2, 3, 5, 7 and at least 4, got {nx} x {ny}"
            )));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(domain(format!("grid spacing must be positive, got {dx}")));
        }
        if !(radius_eps > 0.0) {
            return Err(domain(format!(
                "exclusion radius must be positive, got {radius_eps}"
            )));
        }
        let (cx, cy) = (tube_center.x / dx, tube_center.y / dx);
        if (cx - cx.round()).abs() < 1e-9 && (cy - cy.round()).abs() < 1e-9 {
            return Err(Error::TubeOnNode {
                x: tube_center.x,
                y: tube_center.y,
            });
        }
        let mut g = Self {
            nx,
            ny,
            dx,
            tube_center: [tube_center.x, tube_center.y],
            radius_eps,
            excluded: Vec::new(),
        };
        g.excluded = (0..ny)
            .flat_map(|j| (0..nx).map(move |i| (i, j)))
            .map(|(i, j)| g.relative(i, j).r() < radius_eps)
            .collect();
        Ok(g)
    }

    /// `n x n` grid with the tube axis at the centre of the middle plaquette.
    pub fn centered(n: usize, dx: f64, radius_eps: f64) -> Result<Self> {
        let c = (n as f64 / 2.0 - 0.5) * dx;
        Self::new(n, n, dx, PlanePoint::new(c, c), radius_eps)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn position(&self, i: usize, j: usize) -> PlanePoint {
        PlanePoint::new(i as f64 * self.dx, j as f64 * self.dx)
    }

    /// Node position measured from the tube axis.
    pub fn relative(&self, i: usize, j: usize) -> PlanePoint {
        PlanePoint::new(
            i as f64 * self.dx - self.tube_center[0],
            j as f64 * self.dx - self.tube_center[1],
        )
    }

    pub fn tube_point(&self) -> PlanePoint {
        PlanePoint::new(self.tube_center[0], self.tube_center[1])
    }

    #[inline]
    pub fn is_excluded(&self, idx: usize) -> bool {
        self.excluded[idx]
    }

    pub fn excluded_mask(&self) -> &[bool] {
        &self.excluded
    }

    pub fn excluded_count(&self) -> usize {
        self.excluded.iter().filter(|e| **e).count()
    }

    /// Lower-left node of the plaquette containing the tube axis.
    pub fn tube_plaquette(&self) -> (usize, usize) {
        (
            (self.tube_center[0] / self.dx).floor() as usize,
            (self.tube_center[1] / self.dx).floor() as usize,
        )
    }

    /// Indices of active nodes within `radius` of the tube axis.
    pub fn zone(&self, radius: f64) -> Vec<usize> {
        (0..self.ny)
            .flat_map(|j| (0..self.nx).map(move |i| (i, j)))
            .filter(|&(i, j)| self.relative(i, j).r() < radius)
            .map(|(i, j)| self.index(i, j))
            .filter(|&k| !self.excluded[k])
            .collect()
    }
}
