//! Unitary split-step Crank-Nicolson evolution with lattice gauge links.
//!
//! The covariant lattice Hamiltonian
//! `(H psi)_a = sum_b kappa (psi_a - conj(U_(a->b)) psi_b) + V_a psi_a`,
//! `kappa = 1 / (2 m dx^2)`, is split into its x- and y-hopping parts, each
//! carrying half of `V`. One step applies the Cayley transforms
//! `C_x(dt/2) C_y(dt) C_x(dt/2)`, where
//! `C(tau) = (1 + i tau H/2)^-1 (1 - i tau H/2)` is exactly unitary, so the
//! norm is conserved to round-off for any `dt`. Each Cayley factor is a set
//! of independent tridiagonal solves along grid lines; their LU factors are
//! computed once per configuration.
//!
//! Excluded nodes and the outer boundary are hard walls (Dirichlet).
//!
//! Step-size criterion: the scheme is unconditionally stable, but the phase
//! of a mode with energy `E` is only accurate for `dt E << 1`. Configurations
//! with `dt > m dx^2` (where the bandwidth `4 / (m dx^2)` times `dt` exceeds 4)
//! are rejected.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::field::WaveField;
use super::grid::Grid2D;
use super::links::LinkPhases;
use crate::error::{domain, Error, Result};

/// Per-step relative norm growth that aborts a run.
pub const INSTABILITY_GROWTH: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct EvolveConfig {
    pub mass: f64,
    pub dt: f64,
    pub steps: usize,
    /// Width of the absorbing cosine ramp at the grid edge, in cells; 0 disables it.
    pub absorb_margin: usize,
    pub links: LinkPhases,
    /// External potential per node; `None` means `V = 0`.
    pub potential: Option<Vec<f64>>,
}

impl EvolveConfig {
    pub fn validate(&self, grid: &Grid2D) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(domain(format!("mass must be positive, got {}", self.mass)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(domain(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        if self.dt > self.mass * grid.dx * grid.dx {
            return Err(domain(format!(
                "time step {} exceeds m dx^2 = {}",
                self.dt,
                self.mass * grid.dx * grid.dx
            )));
        }
        if self.links.x.len() != grid.len() || self.links.y.len() != grid.len() {
            return Err(domain("link phases do not match the grid"));
        }
        if let Some(v) = &self.potential {
            if v.len() != grid.len() || v.iter().any(|x| !x.is_finite()) {
                return Err(domain("potential must hold one finite value per node"));
            }
        }
        if 2 * self.absorb_margin >= grid.nx.min(grid.ny) {
            return Err(domain("absorbing margin leaves no interior"));
        }
        Ok(())
    }
}

/// Lines of one direction are grouped into slabs of `LANES` lines (the last
/// slab padded with inert lines). A slab is stored position by position, each
/// position holding the `LANES` values with real and imaginary parts split,
/// so the elimination along the lines runs as vector arithmetic across the
/// lanes.
const LANES: usize = 16;

type Lane = [f64; LANES];

#[derive(Debug, Clone, Copy, PartialEq)]
struct Row {
    re: Lane,
    im: Lane,
}

const ZERO_ROW: Row = Row {
    re: [0.0; LANES],
    im: [0.0; LANES],
};

impl Row {
    fn splat(c: Complex64) -> Self {
        Self {
            re: [c.re; LANES],
            im: [c.im; LANES],
        }
    }

    #[inline(always)]
    fn get(&self, l: usize) -> Complex64 {
        Complex64::new(self.re[l], self.im[l])
    }

    #[inline(always)]
    fn set(&mut self, l: usize, c: Complex64) {
        self.re[l] = c.re;
        self.im[l] = c.im;
    }

    #[inline(always)]
    fn norm_sqr(&self) -> f64 {
        let mut s = 0.0;
        for l in 0..LANES {
            s += self.re[l] * self.re[l] + self.im[l] * self.im[l];
        }
        s
    }
}

/// `a * b` lane by lane.
#[inline(always)]
fn mul(a: &Row, b: &Row) -> Row {
    let mut o = ZERO_ROW;
    for l in 0..LANES {
        o.re[l] = a.re[l] * b.re[l] - a.im[l] * b.im[l];
        o.im[l] = a.re[l] * b.im[l] + a.im[l] * b.re[l];
    }
    o
}

/// `conj(a) * b` lane by lane.
#[inline(always)]
fn mul_conj(a: &Row, b: &Row) -> Row {
    let mut o = ZERO_ROW;
    for l in 0..LANES {
        o.re[l] = a.re[l] * b.re[l] + a.im[l] * b.im[l];
        o.im[l] = a.re[l] * b.im[l] - a.im[l] * b.re[l];
    }
    o
}

#[inline(always)]
fn add(a: &Row, b: &Row) -> Row {
    let mut o = ZERO_ROW;
    for l in 0..LANES {
        o.re[l] = a.re[l] + b.re[l];
        o.im[l] = a.im[l] + b.im[l];
    }
    o
}

#[inline(always)]
fn sub(a: &Row, b: &Row) -> Row {
    let mut o = ZERO_ROW;
    for l in 0..LANES {
        o.re[l] = a.re[l] - b.re[l];
        o.im[l] = a.im[l] - b.im[l];
    }
    o
}

#[derive(Debug, Clone, Copy)]
struct Slabs {
    lines: usize,
    len: usize,
}

impl Slabs {
    fn count(&self) -> usize {
        self.lines.div_ceil(LANES)
    }

    /// `(row index, lane)` of a node.
    #[inline]
    fn locate(&self, line: usize, pos: usize) -> (usize, usize) {
        ((line / LANES) * self.len + pos, line % LANES)
    }

    /// Rows `[b][s]`: slab `s` restricted to the positions held by slab `b`
    /// of the transposed layout, whose lines are this layout's positions.
    fn blocks<'a>(&self, mut data: &'a mut [Row]) -> Vec<Vec<&'a mut [Row]>> {
        let nb = self.len.div_ceil(LANES);
        let mut out: Vec<Vec<&mut [Row]>> =
            (0..nb).map(|_| Vec::with_capacity(self.count())).collect();
        for _ in 0..self.count() {
            for (b, row) in out.iter_mut().enumerate() {
                let wb = LANES.min(self.len - b * LANES);
                let (head, tail) = std::mem::take(&mut data).split_at_mut(wb);
                row.push(head);
                data = tail;
            }
        }
        out
    }
}

/// Write slab rows (`len` positions, lanes are lines) transposed into the
/// blocks of the other layout, skipping padding lanes.
fn scatter(loc: &[Row], lanes: usize, blocks: &mut [&mut [Row]]) {
    for (s, chunk) in blocks.iter_mut().enumerate() {
        let p0 = s * LANES;
        for (l, out) in chunk.iter_mut().enumerate().take(lanes) {
            let q_max = LANES.min(loc.len() - p0);
            for q in 0..q_max {
                out.re[q] = loc[p0 + q].re[l];
                out.im[q] = loc[p0 + q].im[l];
            }
        }
    }
}

/// Factored tridiagonal systems `(1 + i tau H / 2)` for every line of one
/// direction, in slab layout.
struct LineSystem {
    slabs: Slabs,
    /// `i (tau / 2) kappa U_(p -> p+1)`; zero across walls, at line ends and
    /// on padding lanes.
    hop: Vec<Row>,
    inv_den: Vec<Row>,
    /// `conj(hop) * inv_den`, the eliminated super-diagonal.
    cprime: Vec<Row>,
    /// Diagonal of `(1 - i tau H / 2)` when `V = 0`. Excluded nodes hold
    /// zero amplitude and have no couplings, so their diagonal is irrelevant.
    rdiag0: Row,
    /// Per-node diagonal when a potential is present.
    rdiag: Option<Vec<Row>>,
}

impl LineSystem {
    /// `node(line, pos)` gives the row-major node index; `link`, `excluded`,
    /// `potential` are row-major, with `link[node(l, p)]` the edge to `p + 1`.
    fn new(
        slabs: Slabs,
        node: impl Fn(usize, usize) -> usize,
        link: &[Complex64],
        excluded: &[bool],
        potential: Option<&[f64]>,
        kappa: f64,
        tau: f64,
    ) -> Self {
        let rows = slabs.count() * slabs.len;
        let one = Complex64::new(1.0, 0.0);
        let ia = Complex64::new(0.0, 0.5 * tau);
        let mut sys = Self {
            slabs,
            hop: vec![ZERO_ROW; rows],
            inv_den: vec![Row::splat(one); rows],
            cprime: vec![ZERO_ROW; rows],
            rdiag0: Row::splat(one - ia * 2.0 * kappa),
            rdiag: potential.map(|_| vec![Row::splat(one); rows]),
        };
        for l in 0..slabs.lines {
            let mut prev_cp = Complex64::new(0.0, 0.0);
            let mut prev_hop = Complex64::new(0.0, 0.0);
            for p in 0..slabs.len {
                let a = node(l, p);
                let (r, lane) = slabs.locate(l, p);
                let diag = if excluded[a] {
                    one
                } else {
                    let h = ia * (2.0 * kappa + 0.5 * potential.map_or(0.0, |v| v[a]));
                    if let Some(rd) = sys.rdiag.as_mut() {
                        rd[r].set(lane, one - h);
                    }
                    one + h
                };
                let hop = if p + 1 < slabs.len && !excluded[a] && !excluded[node(l, p + 1)] {
                    ia * kappa * link[a]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                // sub_p = -hop_(p-1), sup_p = conj(hop_p)
                let inv = 1.0 / (diag + prev_hop * prev_cp);
                let cp = hop.conj() * inv;
                sys.hop[r].set(lane, hop);
                sys.inv_den[r].set(lane, inv);
                sys.cprime[r].set(lane, cp);
                prev_cp = cp;
                prev_hop = hop;
            }
        }
        sys
    }

    /// Apply the Cayley factor to slab `s`, held in `psi`; `d` is scratch.
    fn apply_slab(&self, s: usize, psi: &mut [Row], d: &mut [Row]) {
        let len = self.slabs.len;
        let base = s * len;
        let hop = &self.hop[base..base + len];
        let inv = &self.inv_den[base..base + len];
        let cp = &self.cprime[base..base + len];
        let rdiag = self.rdiag.as_ref().map(|r| &r[base..base + len]);
        let diag = |p: usize| rdiag.map_or(&self.rdiag0, |r| &r[p]);
        let last = len - 1;

        // forward elimination with the right-hand side (1 - i tau H / 2) psi built in
        d[0] = mul(
            &sub(&mul(diag(0), &psi[0]), &mul_conj(&hop[0], &psi[1])),
            &inv[0],
        );
        for p in 1..last {
            let r = add(
                &mul(diag(p), &psi[p]),
                &mul(&hop[p - 1], &add(&psi[p - 1], &d[p - 1])),
            );
            d[p] = mul(&sub(&r, &mul_conj(&hop[p], &psi[p + 1])), &inv[p]);
        }
        let r = add(
            &mul(diag(last), &psi[last]),
            &mul(&hop[last - 1], &add(&psi[last - 1], &d[last - 1])),
        );
        d[last] = mul(&r, &inv[last]);

        psi[last] = d[last];
        for p in (0..last).rev() {
            psi[p] = sub(&d[p], &mul(&cp[p], &psi[p + 1]));
        }
    }
}

/// Cosine-ramp amplitude mask, 0 on the outermost nodes and 1 beyond `margin`.
fn absorbing_mask(grid: &Grid2D, margin: usize) -> Vec<f64> {
    let ramp = |k: usize, n: usize| -> f64 {
        let d = k.min(n - 1 - k);
        if d >= margin {
            1.0
        } else {
            let s = (margin - d) as f64 / margin as f64;
            (FRAC_PI_2 * s).cos().powf(0.125)
        }
    };
    (0..grid.ny)
        .flat_map(|j| (0..grid.nx).map(move |i| (i, j)))
        .map(|(i, j)| ramp(i, grid.nx) * ramp(j, grid.ny))
        .collect()
}

/// Diagnostics collected over a run.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct RunStats {
    pub steps: usize,
    /// Largest relative norm change of a single unitary step (before absorption).
    pub max_step_drift: f64,
    /// Largest probability found in the guard zone around the tube.
    pub max_guard_probability: f64,
    pub final_norm: f64,
}

/// Per-slab sums of `|psi|^2` at the end of a step.
#[derive(Debug, Clone, Copy, Default)]
struct SlabSums {
    unitary: f64,
    masked: f64,
    guard: f64,
}

/// What an x pass does to each slab.
#[derive(Debug, Clone, Copy)]
struct XPass {
    /// Finish the current step: half sweep, then norm, mask and guard.
    finish: bool,
    /// Begin the next step with a half sweep.
    begin: bool,
}

/// Precomputed propagator for one grid and configuration.
///
/// The field alternates between two layouts: x slabs (lines along x) and
/// y slabs. Every pass reads one slab, applies its sweeps in cache and
/// writes the result transposed into the other layout. The closing x half
/// sweep of one step and the opening one of the next share a pass.
pub struct Evolver {
    grid: Arc<Grid2D>,
    x_half: LineSystem,
    y_full: LineSystem,
    /// Absorbing mask in x-slab layout.
    mask: Option<Vec<Lane>>,
    /// Guard nodes per x slab, as `(position, lane)`.
    guard: Vec<Vec<(usize, usize)>>,
    /// Guard probability that aborts a run.
    guard_limit: f64,
    steps: usize,
}

impl Evolver {
    pub fn new(grid: Arc<Grid2D>, cfg: &EvolveConfig) -> Result<Self> {
        cfg.validate(&grid)?;
        let nx = grid.nx;
        let kappa = 1.0 / (2.0 * cfg.mass * grid.dx * grid.dx);
        let excluded = grid.excluded_mask();
        let potential = cfg.potential.as_deref();
        let xs = Slabs {
            lines: grid.ny,
            len: nx,
        };
        let ys = Slabs {
            lines: nx,
            len: grid.ny,
        };
        let x_half = LineSystem::new(
            xs,
            |j, i| j * nx + i,
            &cfg.links.x,
            excluded,
            potential,
            kappa,
            0.5 * cfg.dt,
        );
        let y_full = LineSystem::new(
            ys,
            |i, j| j * nx + i,
            &cfg.links.y,
            excluded,
            potential,
            kappa,
            cfg.dt,
        );
        let mask = (cfg.absorb_margin > 0).then(|| {
            let mut m = vec![[0.0; LANES]; xs.count() * xs.len];
            for (k, v) in absorbing_mask(&grid, cfg.absorb_margin)
                .into_iter()
                .enumerate()
            {
                let (r, l) = xs.locate(k / nx, k % nx);
                m[r][l] = v;
            }
            m
        });
        Ok(Self {
            grid,
            x_half,
            y_full,
            mask,
            guard: Vec::new(),
            guard_limit: f64::INFINITY,
            steps: cfg.steps,
        })
    }

    /// Track the probability on these nodes (row-major indices) during runs
    /// and abort with [`Error::InvalidRun`] once it exceeds `limit`.
    pub fn with_guard(mut self, nodes: Vec<usize>, limit: f64) -> Self {
        self.guard_limit = limit;
        let nx = self.grid.nx;
        let mut guard = vec![Vec::new(); self.x_half.slabs.count()];
        for k in nodes {
            let (j, i) = (k / nx, k % nx);
            guard[j / LANES].push((i, j % LANES));
        }
        self.guard = guard;
        self
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    /// x sweeps on every x slab of `src`, written into the y layout `dst`.
    fn x_pass(&self, src: &[Row], dst: &mut [Row], what: XPass) -> Vec<SlabSums> {
        let len = self.grid.nx;
        let cell = self.grid.dx * self.grid.dx;
        let ny = self.grid.ny;
        self.y_full
            .slabs
            .blocks(dst)
            .into_par_iter()
            .enumerate()
            .map_init(
                || (vec![ZERO_ROW; len], vec![ZERO_ROW; len]),
                |(loc, d), (s, mut blocks)| {
                    loc.copy_from_slice(&src[s * len..(s + 1) * len]);
                    let mut sums = SlabSums::default();
                    if what.finish {
                        self.x_half.apply_slab(s, loc, d);
                        sums.unitary = loc.iter().map(Row::norm_sqr).sum::<f64>() * cell;
                        sums.masked = match &self.mask {
                            Some(m) => {
                                let mut acc = 0.0;
                                for (row, f) in loc.iter_mut().zip(&m[s * len..(s + 1) * len]) {
                                    for ((re, im), f) in row.re.iter_mut().zip(&mut row.im).zip(f) {
                                        *re *= f;
                                        *im *= f;
                                    }
                                    acc += row.norm_sqr();
                                }
                                acc * cell
                            }
                            None => sums.unitary,
                        };
                        if let Some(g) = self.guard.get(s) {
                            sums.guard = g
                                .iter()
                                .map(|&(p, l)| loc[p].get(l).norm_sqr())
                                .sum::<f64>()
                                * cell;
                        }
                    }
                    if what.begin {
                        self.x_half.apply_slab(s, loc, d);
                    }
                    scatter(loc, LANES.min(ny - s * LANES), &mut blocks);
                    sums
                },
            )
            .collect()
    }

    /// y sweeps on every y slab of `src`, written into the x layout `dst`.
    fn y_pass(&self, src: &[Row], dst: &mut [Row]) {
        let len = self.grid.ny;
        let nx = self.grid.nx;
        self.x_half
            .slabs
            .blocks(dst)
            .into_par_iter()
            .enumerate()
            .for_each_init(
                || (vec![ZERO_ROW; len], vec![ZERO_ROW; len]),
                |(loc, d), (s, mut blocks)| {
                    loc.copy_from_slice(&src[s * len..(s + 1) * len]);
                    self.y_full.apply_slab(s, loc, d);
                    scatter(loc, LANES.min(nx - s * LANES), &mut blocks);
                },
            );
    }

    /// Advance `field` by the configured number of steps.
    pub fn run(&self, field: &mut WaveField) -> Result<RunStats> {
        self.run_steps(field, self.steps)
    }

    pub fn run_steps(&self, field: &mut WaveField, steps: usize) -> Result<RunStats> {
        if !Arc::ptr_eq(field.grid(), &self.grid) && **field.grid() != *self.grid {
            return Err(domain("field and propagator use different grids"));
        }
        let (xs, ys) = (self.x_half.slabs, self.y_full.slabs);
        let nx = self.grid.nx;
        let cell = self.grid.dx * self.grid.dx;
        let mut x = vec![ZERO_ROW; xs.count() * xs.len];
        let mut y = vec![ZERO_ROW; ys.count() * ys.len];
        for (k, c) in field.data().iter().enumerate() {
            let (r, l) = xs.locate(k / nx, k % nx);
            x[r].set(l, *c);
        }
        let guard0: f64 = self
            .guard
            .iter()
            .enumerate()
            .flat_map(|(s, g)| g.iter().map(move |&(p, l)| (s * xs.len + p, l)))
            .map(|(r, l)| x[r].get(l).norm_sqr())
            .sum();
        let mut stats = RunStats {
            steps,
            max_guard_probability: guard0 * cell,
            ..Default::default()
        };
        let mut norm = field.norm();
        if steps == 0 {
            stats.final_norm = norm;
            return Ok(stats);
        }
        self.x_pass(
            &x,
            &mut y,
            XPass {
                finish: false,
                begin: true,
            },
        );
        for step in 0..steps {
            self.y_pass(&y, &mut x);
            let begin = step + 1 < steps;
            let sums = self.x_pass(
                &x,
                &mut y,
                XPass {
                    finish: true,
                    begin,
                },
            );
            let unitary: f64 = sums.iter().map(|s| s.unitary).sum();
            let drift = (unitary - norm) / norm;
            if !(drift <= INSTABILITY_GROWTH) {
                return Err(Error::Instability {
                    step,
                    growth: drift,
                });
            }
            stats.max_step_drift = stats.max_step_drift.max(drift.abs());
            norm = sums.iter().map(|s| s.masked).sum();
            let guard: f64 = sums.iter().map(|s| s.guard).sum();
            stats.max_guard_probability = stats.max_guard_probability.max(guard);
            if guard > self.guard_limit {
                return Err(Error::InvalidRun(format!(
                    "probability {guard:.3e} near the tube at step {step} exceeds {:.1e}",
                    self.guard_limit
                )));
            }
        }
        // the last pass left the field in the y layout
        for (k, c) in field.data_mut().iter_mut().enumerate() {
            let (r, l) = ys.locate(k % nx, k / nx);
            *c = y[r].get(l);
        }
        stats.final_norm = norm;
        Ok(stats)
    }
}

/// Evolve a copy of `field` under `cfg`.
pub fn evolve(field: &WaveField, cfg: &EvolveConfig) -> Result<WaveField> {
    let ev = Evolver::new(field.grid().clone(), cfg)?;
    let mut out = field.clone();
    ev.run(&mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::field::Packet;
    use std::f64::consts::PI;

    fn free_config(grid: &Grid2D, dt: f64, steps: usize) -> EvolveConfig {
        EvolveConfig {
            mass: 1.0,
            dt,
            steps,
            absorb_margin: 0,
            links: LinkPhases::trivial(grid),
            potential: None,
        }
    }

    #[test]
    fn slab_locations_are_a_bijection() {
        for (lines, len) in [(37, 20), (16, 5), (48, 7)] {
            let s = Slabs { lines, len };
            let mut seen = vec![[false; LANES]; s.count() * len];
            for l in 0..lines {
                for p in 0..len {
                    let (r, lane) = s.locate(l, p);
                    assert!(!seen[r][lane]);
                    seen[r][lane] = true;
                }
            }
            let mut rows = vec![ZERO_ROW; s.count() * len];
            let blocks = s.blocks(&mut rows);
            assert_eq!(blocks.len(), len.div_ceil(LANES));
            assert_eq!(
                blocks.iter().flatten().map(|c| c.len()).sum::<usize>(),
                s.count() * len
            );
        }
    }

    #[test]
    fn non_multiple_of_lanes_grid_matches_reference_solution() {
        // 20 x 24 exercises padded slabs in both directions
        let grid = Arc::new(
            Grid2D::new(20, 24, 1.0, crate::gauge::PlanePoint::new(9.5, 11.5), 0.1).unwrap(),
        );
        let (kx, ky) = (PI / 21.0, 2.0 * PI / 25.0);
        let mode = WaveField::from_fn(grid.clone(), |i, j| {
            Complex64::new(
                ((i + 1) as f64 * kx).sin() * ((j + 1) as f64 * ky).sin(),
                0.0,
            )
        });
        let (dt, steps) = (0.3, 40);
        let out = evolve(&mode, &free_config(&grid, dt, steps)).unwrap();
        let ex = 1.0 - kx.cos();
        let ey = 1.0 - ky.cos();
        let cayley = |tau: f64, e: f64| {
            (Complex64::new(1.0, -0.5 * tau * e) / Complex64::new(1.0, 0.5 * tau * e)).arg()
        };
        let per_step = 2.0 * cayley(dt / 2.0, ex) + cayley(dt, ey);
        let want = Complex64::from_polar(1.0, per_step * steps as f64);
        for (a, b) in out.data().iter().zip(mode.data()) {
            if b.norm() > 1e-3 {
                assert!((a / b - want).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn dirichlet_ground_mode_is_stationary() {
        let n = 64;
        let grid = Arc::new(Grid2D::centered(n, 1.0, 0.1).unwrap());
        let k = PI / (n + 1) as f64;
        let mode = WaveField::from_fn(grid.clone(), |i, j| {
            Complex64::new(((i + 1) as f64 * k).sin() * ((j + 1) as f64 * k).sin(), 0.0)
        });
        let (dt, steps) = (0.5, 200);
        let cfg = free_config(&grid, dt, steps);
        let out = evolve(&mode, &cfg).unwrap();

        // exact Cayley phase of each split factor, and the continuum-time phase
        let e1 = 1.0 - k.cos(); // kappa * (2 - 2 cos k) with kappa = 1/2
        let cayley = |tau: f64| {
            let z = Complex64::new(1.0, -0.5 * tau * e1) / Complex64::new(1.0, 0.5 * tau * e1);
            z.arg()
        };
        let per_step = 2.0 * cayley(dt / 2.0) + cayley(dt);
        let want = Complex64::from_polar(1.0, per_step * steps as f64);
        let energy = 2.0 * e1;
        let continuum = Complex64::from_polar(1.0, -energy * dt * steps as f64);
        for (a, b) in out.data().iter().zip(mode.data()) {
            if b.norm() > 1e-3 {
                assert!((a / b - want).norm() < 1e-10);
                assert!((a / b - continuum).norm() < 1e-4);
            }
        }
    }

    #[test]
    fn free_packet_spreads_like_the_continuum() {
        let grid = Arc::new(Grid2D::centered(256, 1.0, 0.1).unwrap());
        let sigma0 = 8.0;
        let c = 127.0;
        let field = WaveField::gaussian(
            grid.clone(),
            &Packet {
                center: [c, c],
                sigma: sigma0,
                k: [0.0, 0.0],
            },
        )
        .unwrap();
        let (dt, steps) = (0.4, 500);
        let out = evolve(&field, &free_config(&grid, dt, steps)).unwrap();
        let t = dt * steps as f64;
        let want = sigma0 * sigma0 + (t / (2.0 * sigma0)).powi(2);
        let (_, var) = out.moments();
        for v in var {
            assert!((v - want).abs() < 0.01 * want, "variance {v} vs {want}");
        }
    }

    #[test]
    fn norm_is_conserved_with_links_and_tube() {
        let grid = Arc::new(Grid2D::centered(64, 1.0, 1.0).unwrap());
        let c = crate::units::PhysicalConstants::default();
        let f = crate::units::FluxTube::new(0.3 * c.phi_m0, 0.0, 1.0).unwrap();
        let links = super::super::links::build_link_phases(
            &grid,
            &crate::units::DyonCharge::new(c.e, 0.0),
            &f,
        )
        .unwrap();
        let field = WaveField::gaussian(
            grid.clone(),
            &Packet {
                center: [20.0, 31.5],
                sigma: 4.0,
                k: [0.8, 0.0],
            },
        )
        .unwrap();
        let cfg = EvolveConfig {
            links,
            ..free_config(&grid, 0.5, 100)
        };
        let ev = Evolver::new(grid.clone(), &cfg).unwrap();
        let mut psi = field.clone();
        let stats = ev.run(&mut psi).unwrap();
        assert!(stats.max_step_drift < 1e-10, "{stats:?}");
        assert!((stats.final_norm - 1.0).abs() < 1e-10);
        assert!(grid
            .excluded_mask()
            .iter()
            .zip(psi.data())
            .all(|(e, c)| !e || c.norm() == 0.0));
    }

    #[test]
    fn absorber_removes_outgoing_probability() {
        let grid = Arc::new(Grid2D::centered(64, 1.0, 0.1).unwrap());
        let field = WaveField::gaussian(
            grid.clone(),
            &Packet {
                center: [32.0, 32.0],
                sigma: 4.0,
                k: [1.0, 0.0],
            },
        )
        .unwrap();
        let cfg = EvolveConfig {
            absorb_margin: 12,
            ..free_config(&grid, 0.5, 300)
        };
        let out = evolve(&field, &cfg).unwrap();
        assert!(out.norm() < 0.05);
    }

    #[test]
    fn coarse_time_step_rejected() {
        let grid = Arc::new(Grid2D::centered(16, 1.0, 0.1).unwrap());
        let cfg = free_config(&grid, 1.5, 1);
        assert!(Evolver::new(grid, &cfg).is_err());
    }
}
