//! Minimal coupling on the lattice: each edge carries
//! `U = exp(i * integral of (q A + g C) along the edge)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::grid::Grid2D;
use crate::error::Result;
use crate::gauge::{conjugate_momentum_field, segment_integral, PlanePoint};
use crate::phase::effective_alpha;
use crate::units::{DyonCharge, FluxTube};

/// Edge phases. `x[idx(i, j)]` is the edge `(i, j) -> (i+1, j)`,
/// `y[idx(i, j)]` the edge `(i, j) -> (i, j+1)`. Edges leaving the grid hold 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkPhases {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
}

impl LinkPhases {
    pub fn trivial(grid: &Grid2D) -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self {
            x: vec![one; grid.len()],
            y: vec![one; grid.len()],
        }
    }

    /// Links after the gauge transformation `psi -> exp(i lambda) psi`:
    /// `U_(a->b) -> exp(-i lambda_a) U exp(i lambda_b)`.
    pub fn gauge_transformed(&self, grid: &Grid2D, lambda: &[f64]) -> Self {
        let mut out = self.clone();
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let a = grid.index(i, j);
                if i + 1 < grid.nx {
                    out.x[a] *= Complex64::from_polar(1.0, lambda[a + 1] - lambda[a]);
                }
                if j + 1 < grid.ny {
                    out.y[a] *= Complex64::from_polar(1.0, lambda[a + grid.nx] - lambda[a]);
                }
            }
        }
        out
    }

    /// Counterclockwise product around the plaquette with lower-left node `(i, j)`.
    pub fn plaquette(&self, grid: &Grid2D, i: usize, j: usize) -> Complex64 {
        let a = grid.index(i, j);
        self.x[a] * self.y[a + 1] * self.x[a + grid.nx].conj() * self.y[a].conj()
    }
}

/// Distance from `p` to the segment `a b`.
fn segment_distance(p: PlanePoint, a: PlanePoint, b: PlanePoint) -> f64 {
    let (vx, vy) = (b.x - a.x, b.y - a.y);
    let t = (((p.x - a.x) * vx + (p.y - a.y) * vy) / (vx * vx + vy * vy)).clamp(0.0, 1.0);
    (p.x - a.x - t * vx).hypot(p.y - a.y - t * vy)
}

fn edge_phase(
    d: &DyonCharge,
    line: &FluxTube,
    grid: &Grid2D,
    a: PlanePoint,
    b: PlanePoint,
) -> Result<Complex64> {
    let rho = segment_distance(PlanePoint::new(0.0, 0.0), a, b);
    // pieces shorter than a quarter of the distance to the axis keep the
    // 8-point rule at round-off level even next to the tube
    let step = grid.dx.min(0.25 * rho);
    let field = |p: PlanePoint| conjugate_momentum_field(d, line, p);
    Ok(Complex64::from_polar(
        1.0,
        segment_integral(&field, a, b, step)?,
    ))
}

/// Integrate the exterior potentials along every edge.
///
/// The potentials are evaluated in the flux-line limit (the exterior
/// formula continued down to the axis), so edges touching excluded nodes
/// still carry well-defined phases; those nodes are removed from the
/// dynamics by the solver.
pub fn build_link_phases(grid: &Grid2D, d: &DyonCharge, f: &FluxTube) -> Result<LinkPhases> {
    let line = f.with_radius(f64::MIN_POSITIVE)?;
    let rows: Vec<(Vec<Complex64>, Vec<Complex64>)> = (0..grid.ny)
        .into_par_iter()
        .map(|j| -> Result<_> {
            let mut xs = Vec::with_capacity(grid.nx);
            let mut ys = Vec::with_capacity(grid.nx);
            for i in 0..grid.nx {
                let a = grid.relative(i, j);
                xs.push(if i + 1 < grid.nx {
                    edge_phase(d, &line, grid, a, grid.relative(i + 1, j))?
                } else {
                    Complex64::new(1.0, 0.0)
                });
                ys.push(if j + 1 < grid.ny {
                    edge_phase(d, &line, grid, a, grid.relative(i, j + 1))?
                } else {
                    Complex64::new(1.0, 0.0)
                });
            }
            Ok((xs, ys))
        })
        .collect::<Result<_>>()?;
    let mut links = LinkPhases {
        x: Vec::with_capacity(grid.len()),
        y: Vec::with_capacity(grid.len()),
    };
    for (xs, ys) in rows {
        links.x.extend(xs);
        links.y.extend(ys);
    }
    Ok(links)
}

/// Worst deviations of plaquette products from their expected values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaquetteReport {
    /// `max |P - 1|` over plaquettes not containing the tube.
    pub max_exterior_deviation: f64,
    /// `|P_tube - exp(2 pi i alpha_eff)|`.
    pub tube_deviation: f64,
    /// Phase of the tube plaquette.
    pub tube_circulation: f64,
}

pub fn plaquette_report(grid: &Grid2D, links: &LinkPhases, alpha_eff: f64) -> PlaquetteReport {
    let tube = grid.tube_plaquette();
    let one = Complex64::new(1.0, 0.0);
    let max_exterior_deviation = (0..grid.ny - 1)
        .into_par_iter()
        .map(|j| {
            (0..grid.nx - 1)
                .filter(|&i| (i, j) != tube)
                .map(|i| (links.plaquette(grid, i, j) - one).norm())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let p = links.plaquette(grid, tube.0, tube.1);
    PlaquetteReport {
        max_exterior_deviation,
        tube_deviation: (p - Complex64::from_polar(1.0, TAU * alpha_eff)).norm(),
        tube_circulation: p.arg(),
    }
}

/// Links for charges `d` around tube `f`, with their plaquette report.
pub fn links_for(
    grid: &Grid2D,
    d: &DyonCharge,
    f: &FluxTube,
) -> Result<(LinkPhases, PlaquetteReport)> {
    let links = build_link_phases(grid, d, f)?;
    let report = plaquette_report(grid, &links, effective_alpha(d, f));
    Ok((links, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{witten_charges, PhysicalConstants};

    #[test]
    fn zero_flux_links_are_trivial() {
        let g = Grid2D::centered(32, 1.0, 1.0).unwrap();
        let f = FluxTube::new(0.0, 0.0, 1.0).unwrap();
        let links = build_link_phases(&g, &DyonCharge::new(1.0, 1.0), &f).unwrap();
        assert_eq!(links, LinkPhases::trivial(&g));
    }

    #[test]
    fn one_flux_quantum_circulates_two_pi() {
        let c = PhysicalConstants::default();
        let g = Grid2D::centered(32, 1.0, 1.0).unwrap();
        let f = FluxTube::new(c.phi_m0, 0.0, 1.0).unwrap();
        let (_, rep) = links_for(&g, &DyonCharge::new(c.e, 0.0), &f).unwrap();
        assert!(rep.tube_deviation < 1e-10, "{rep:?}");
        assert!(rep.max_exterior_deviation < 1e-10, "{rep:?}");
    }

    #[test]
    fn cp_conserving_links_are_trivial_mod_two_pi() {
        let c = PhysicalConstants::default();
        let g = Grid2D::centered(32, 1.0, 1.0).unwrap();
        let f = FluxTube::flux_quanta(1.0, &c).unwrap();
        let (links, rep) = links_for(&g, &DyonCharge::new(c.e, c.g0), &f).unwrap();
        assert!(rep.tube_deviation < 1e-10 && rep.max_exterior_deviation < 1e-10);
        assert!(links
            .x
            .iter()
            .chain(links.y.iter())
            .all(|u| (u - 1.0).norm() < 1e-12));
    }

    #[test]
    fn vacuum_links_circulate_theta() {
        let c = PhysicalConstants::default();
        let g = Grid2D::centered(48, 0.5, 0.5).unwrap();
        let f = FluxTube::flux_quanta(0.5, &c).unwrap();
        let theta = 1.0;
        let (_, rep) = links_for(&g, &witten_charges(1, 1, theta, &c), &f).unwrap();
        assert!((rep.tube_circulation - theta).abs() < 1e-10);
        assert!(rep.max_exterior_deviation < 1e-10);
    }

    #[test]
    fn gauge_transform_keeps_plaquettes() {
        let c = PhysicalConstants::default();
        let g = Grid2D::centered(16, 1.0, 1.0).unwrap();
        let f = FluxTube::new(0.3 * c.phi_m0, 0.0, 1.0).unwrap();
        let links = build_link_phases(&g, &DyonCharge::new(c.e, 0.0), &f).unwrap();
        let lambda: Vec<f64> = (0..g.len())
            .map(|k| (k as f64 * 0.37).sin() * 3.0)
            .collect();
        let moved = links.gauge_transformed(&g, &lambda);
        for j in 0..g.ny - 1 {
            for i in 0..g.nx - 1 {
                assert!((links.plaquette(&g, i, j) - moved.plaquette(&g, i, j)).norm() < 1e-13);
            }
        }
    }
}
