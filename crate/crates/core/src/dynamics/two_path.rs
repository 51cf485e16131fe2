//! Two-path interference around the tube.
//!
//! Two Gaussian packets start symmetrically above and below the tube, on
//! the upstream side, and are aimed at a common meeting point downstream.
//! Each packet is evolved separately (the superposition is linear), once
//! with the dyon's link phases and once with trivial links as the reference.
//!
//! At `t = 0` each flux-coupled packet is dressed with `exp(i alpha phi)`,
//! `phi` the azimuth about the tube in `[0, 2 pi)`, which is the lattice
//! gauge transform taking trivial links to the tube links on any region the
//! cut `phi = 0` does not cross. Two estimators of the relative phase:
//!
//! * overlap: `arg sum conj(psi0_L^* psi0_R) psi_L^* psi_R` over the downstream
//!   half-plane. The products `psi_L^* psi_R` are gauge invariant; weighting
//!   by the reference product removes the propagation phase that the plain
//!   overlap `<psi_L|psi_R>` carries (its modulus is exponentially small once
//!   the packets' momenta differ by more than their spread);
//! * fringe: phase of the fundamental of `|psi_L + psi_R|^2` at the wave
//!   vector difference `k_R - k_L`, relative to the reference run.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{Packet, WaveField};
use super::grid::Grid2D;
use super::links::{build_link_phases, plaquette_report, LinkPhases, PlaquetteReport};
use super::solver::{EvolveConfig, Evolver, RunStats};
use crate::error::{domain, Result};
use crate::phase::{circular_distance, effective_alpha, reduce_angle};
use crate::units::{DyonCharge, FluxTube};

/// Largest probability allowed near the tube before a run is rejected.
pub const GUARD_PROBABILITY: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoPathGeometry {
    /// Grid side in cells.
    pub n: usize,
    pub dx: f64,
    /// Exclusion radius around the tube axis.
    pub radius_eps: f64,
    pub mass: f64,
    /// Packet width (standard deviation of `|psi|^2`).
    pub sigma: f64,
    /// Group speed in units of `1 / (m dx)`; must lie in `(0, 1)`.
    pub speed: f64,
    /// Upstream distance of the sources from the tube.
    pub source_x: f64,
    /// Vertical offset of each source from the tube axis.
    pub source_y: f64,
    /// Downstream distance of the meeting point from the tube.
    pub meet_x: f64,
    pub dt: f64,
    /// Extra steps beyond the nominal arrival time; negative stops early.
    #[serde(default)]
    pub extra_steps: i64,
    pub absorb_margin: usize,
    /// Radius of the guard zone monitored for invalid runs.
    pub guard_radius: f64,
}

impl TwoPathGeometry {
    /// 512 x 512 grid, about 2300 steps.
    pub fn reference() -> Self {
        Self {
            n: 512,
            dx: 1.0,
            radius_eps: 1.0,
            mass: 1.0,
            sigma: 10.0,
            speed: 0.8,
            source_x: 140.0,
            source_y: 170.0,
            meet_x: 190.0,
            dt: 0.2,
            extra_steps: 0,
            absorb_margin: 24,
            guard_radius: 3.0,
        }
    }

    /// 256 x 256 variant for fast checks.
    pub fn quick() -> Self {
        Self {
            n: 256,
            sigma: 8.0,
            speed: 0.85,
            source_x: 60.0,
            source_y: 90.0,
            meet_x: 100.0,
            dt: 0.25,
            absorb_margin: 12,
            ..Self::reference()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.speed > 0.0 && self.speed < 1.0) {
            return Err(domain(format!(
                "packet speed must lie in (0, 1), got {}",
                self.speed
            )));
        }
        for (name, v) in [
            ("sigma", self.sigma),
            ("source_x", self.source_x),
            ("source_y", self.source_y),
            ("meet_x", self.meet_x),
            ("guard_radius", self.guard_radius),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(domain(format!(
                    "two-path geometry: {name} must be positive, got {v}"
                )));
            }
        }
        let half = 0.5 * (self.n as f64 - 1.0) * self.dx;
        let interior = half - self.absorb_margin as f64 * self.dx;
        let sources = self.source_x.max(self.source_y) + 3.0 * self.sigma;
        if sources > interior || self.meet_x >= interior {
            return Err(domain("two-path geometry does not fit inside the grid"));
        }
        if self.guard_radius < self.radius_eps {
            return Err(domain("guard radius must cover the excluded zone"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::centered(self.n, self.dx, self.radius_eps)
    }

    /// Direction of flight of the upper packet (the lower one is its mirror).
    fn heading(&self) -> [f64; 2] {
        let (vx, vy) = (self.source_x + self.meet_x, -self.source_y);
        let len = vx.hypot(vy);
        [vx / len, vy / len]
    }

    /// Lattice wave vector giving group velocity `speed / (m dx)` along `dir`.
    fn wave_vector(&self, dir: [f64; 2]) -> [f64; 2] {
        [
            (self.speed * dir[0]).asin() / self.dx,
            (self.speed * dir[1]).asin() / self.dx,
        ]
    }

    /// Steps needed for the packets to reach the meeting point.
    pub fn steps(&self) -> usize {
        let path = (self.source_x + self.meet_x).hypot(self.source_y);
        let velocity = self.speed / (self.mass * self.dx);
        let nominal = (path / velocity / self.dt).round() as i64;
        (nominal + self.extra_steps).max(1) as usize
    }

    /// Closest approach of the packet centres to the tube axis.
    pub fn closest_approach(&self) -> f64 {
        let [hx, hy] = self.heading();
        ((-self.source_x) * hy - self.source_y * hx).abs()
    }

    /// Upper (`L`) and lower (`R`) packets.
    fn packets(&self, grid: &Grid2D) -> (Packet, Packet) {
        let c = grid.tube_center;
        let [hx, hy] = self.heading();
        let upper = Packet {
            center: [c[0] - self.source_x, c[1] + self.source_y],
            sigma: self.sigma,
            k: self.wave_vector([hx, hy]),
        };
        let lower = Packet {
            center: [c[0] - self.source_x, c[1] - self.source_y],
            sigma: self.sigma,
            k: self.wave_vector([hx, -hy]),
        };
        (upper, lower)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoPathResult {
    pub alpha_eff: f64,
    /// Overlap estimate, reduced to `[0, 2 pi)`.
    pub measured_phase: f64,
    /// Fringe estimate, reduced to `[0, 2 pi)`.
    pub fringe_phase: f64,
    /// `2 pi alpha_eff` reduced to `[0, 2 pi)`.
    pub expected_phase: f64,
    /// Circular distance between measured and expected phase.
    pub error: f64,
    /// Circular distance between the two estimators.
    pub estimator_gap: f64,
    /// Interference visibility of the overlap estimator, in `[0, 1]`.
    pub visibility: f64,
    pub max_guard_probability: f64,
    pub steps: usize,
    pub plaquettes: PlaquetteReport,
    /// `(y, |psi_L + psi_R|^2)` down the grid column through the meeting point.
    #[serde(skip)]
    pub profile: Vec<(f64, f64)>,
}

struct PairRun {
    upper: WaveField,
    lower: WaveField,
    stats: [RunStats; 2],
}

/// Cached reference runs for one geometry.
pub struct TwoPathExperiment {
    geometry: TwoPathGeometry,
    grid: Arc<Grid2D>,
    guard: Vec<usize>,
    window: Vec<bool>,
    delta_k: [f64; 2],
    reference: PairRun,
}

impl TwoPathExperiment {
    pub fn new(geometry: TwoPathGeometry) -> Result<Self> {
        geometry.validate()?;
        let grid = Arc::new(geometry.grid()?);
        let guard = grid.zone(geometry.guard_radius);
        let tube_x = grid.tube_center[0];
        let window = (0..grid.ny)
            .flat_map(|_| 0..grid.nx)
            .map(|i| i as f64 * grid.dx > tube_x)
            .collect();
        let (up, low) = geometry.packets(&grid);
        let delta_k = [low.k[0] - up.k[0], low.k[1] - up.k[1]];
        let mut exp = Self {
            geometry,
            grid: grid.clone(),
            guard,
            window,
            delta_k,
            reference: PairRun {
                upper: WaveField::zeros(grid.clone()),
                lower: WaveField::zeros(grid),
                stats: [RunStats::default(); 2],
            },
        };
        let trivial = LinkPhases::trivial(&exp.grid);
        exp.reference = exp.run_pair(trivial, 0.0)?;
        Ok(exp)
    }

    pub fn geometry(&self) -> &TwoPathGeometry {
        &self.geometry
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    fn run_pair(&self, links: LinkPhases, alpha: f64) -> Result<PairRun> {
        let g = &self.geometry;
        let cfg = EvolveConfig {
            mass: g.mass,
            dt: g.dt,
            steps: g.steps(),
            absorb_margin: g.absorb_margin,
            links,
            potential: None,
        };
        let ev = Evolver::new(self.grid.clone(), &cfg)?
            .with_guard(self.guard.clone(), GUARD_PROBABILITY);
        let dressing: Vec<f64> = (0..self.grid.ny)
            .flat_map(|j| (0..self.grid.nx).map(move |i| (i, j)))
            .map(|(i, j)| alpha * reduce_angle(self.grid.relative(i, j).azimuth()))
            .collect();
        let (up, low) = g.packets(&self.grid);
        let run = |p: &Packet| -> Result<(WaveField, RunStats)> {
            let mut psi = WaveField::gaussian(self.grid.clone(), p)?;
            psi.apply_phase(&dressing);
            let stats = ev.run(&mut psi)?;
            Ok((psi, stats))
        };
        let (upper, s0) = run(&up)?;
        let (lower, s1) = run(&low)?;
        Ok(PairRun {
            upper,
            lower,
            stats: [s0, s1],
        })
    }

    /// `sum conj(ref_L^* ref_R) psi_L^* psi_R` over the window, and its visibility.
    fn overlap(&self, run: &PairRun) -> (Complex64, f64) {
        let r = &self.reference;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut norm = 0.0;
        let data = run
            .upper
            .data()
            .iter()
            .zip(run.lower.data())
            .zip(r.upper.data().iter().zip(r.lower.data()));
        for (w, ((a, b), (a0, b0))) in self.window.iter().zip(data) {
            if *w {
                let p = a.conj() * b;
                let p0 = a0.conj() * b0;
                acc += p0.conj() * p;
                norm += p0.norm() * p.norm();
            }
        }
        let vis = if norm > 0.0 { acc.norm() / norm } else { 0.0 };
        (acc, vis)
    }

    /// Fundamental of `|psi_L + psi_R|^2` at `k_R - k_L` over the window.
    fn fringe(&self, run: &PairRun) -> Complex64 {
        let g = &self.grid;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..g.ny {
            for i in 0..g.nx {
                let k = g.index(i, j);
                if !self.window[k] {
                    continue;
                }
                let intensity = (run.upper.data()[k] + run.lower.data()[k]).norm_sqr();
                let (x, y) = (i as f64 * g.dx, j as f64 * g.dx);
                acc +=
                    Complex64::from_polar(intensity, -(self.delta_k[0] * x + self.delta_k[1] * y));
            }
        }
        acc
    }

    fn profile(&self, run: &PairRun) -> Vec<(f64, f64)> {
        let g = &self.grid;
        let x = g.tube_center[0] + self.geometry.meet_x;
        let i = ((x / g.dx).round() as usize).min(g.nx - 1);
        (0..g.ny)
            .map(|j| {
                let k = g.index(i, j);
                (
                    j as f64 * g.dx,
                    (run.upper.data()[k] + run.lower.data()[k]).norm_sqr(),
                )
            })
            .collect()
    }

    /// Measure with the link phases of charges `d` around tube `f`.
    pub fn measure(&self, d: &DyonCharge, f: &FluxTube) -> Result<TwoPathResult> {
        let alpha = effective_alpha(d, f);
        let links = build_link_phases(&self.grid, d, f)?;
        let plaquettes = plaquette_report(&self.grid, &links, alpha);
        self.measure_with_links(links, alpha, plaquettes)
    }

    fn measure_with_links(
        &self,
        links: LinkPhases,
        alpha: f64,
        plaquettes: PlaquetteReport,
    ) -> Result<TwoPathResult> {
        let run = self.run_pair(links, alpha)?;
        let (overlap, visibility) = self.overlap(&run);
        let f1 = self.fringe(&run);
        let f0 = self.fringe(&self.reference);
        let measured = reduce_angle(overlap.arg());
        let fringe = reduce_angle((f1 * f0.conj()).arg());
        let expected = reduce_angle(TAU * alpha);
        let guard = run
            .stats
            .iter()
            .chain(self.reference.stats.iter())
            .map(|s| s.max_guard_probability)
            .fold(0.0, f64::max);
        Ok(TwoPathResult {
            profile: self.profile(&run),
            alpha_eff: alpha,
            measured_phase: measured,
            fringe_phase: fringe,
            expected_phase: expected,
            error: circular_distance(measured, expected),
            estimator_gap: circular_distance(measured, fringe),
            visibility,
            max_guard_probability: guard,
            steps: self.geometry.steps(),
            plaquettes,
        })
    }
}

/// One-shot measurement: reference runs plus the flux-coupled runs.
pub fn two_path_phase(
    d: &DyonCharge,
    f: &FluxTube,
    geometry: &TwoPathGeometry,
) -> Result<TwoPathResult> {
    TwoPathExperiment::new(*geometry)?.measure(d, f)
}
