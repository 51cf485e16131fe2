//! Seeded invariant suite.
//!
//! Each check draws its samples from its own ChaCha8 stream, seeded from the
//! suite seed and the check name, so the samples a check sees do not depend
//! on which other checks run. A check reports the worst deviation it found,
//! the tolerance it was held to, and where the worst case occurred.

use std::cell::OnceCell;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, PI, TAU};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    build_link_phases, fringe_shift, plaquette_report, EvolveConfig, Evolver, Grid2D, Packet,
    SlitGeometry, TwoPathExperiment, TwoPathGeometry, WaveField,
};
use crate::error::{domain, Error, Result};
use crate::gauge::{beta_gradient, conjugate_momentum_field, line_integral, PlanePath, PlanePoint};
use crate::phase::{
    circular_distance, dyon_phase, dyon_phase_split, effective_alpha, flux_rule_phase, theta_phase,
    theta_phase_from_g,
};
use crate::scattering::{
    ab_cross_section, partial_wave_cross_section, theta_cross_section, PartialWaveOptions,
    Summation,
};
use crate::units::{
    duality_rotate, flux_from_integers, sz_pairing, witten_charges, DyonCharge, FluxTube,
    PhysicalConstants, ALPHA_QUARTER,
};
use crate::vacua::{build_theta_vacuum, dyon_state_factor, eigenvalue_residual};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Algebra,
    Gauge,
    Vacua,
    Scattering,
    Dynamics,
    Fringe,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Algebra,
        Suite::Gauge,
        Suite::Vacua,
        Suite::Scattering,
        Suite::Dynamics,
        Suite::Fringe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Gauge => "gauge",
            Suite::Vacua => "vacua",
            Suite::Scattering => "scattering",
            Suite::Dynamics => "dynamics",
            Suite::Fringe => "fringe",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Selection of suites; `all` expands to every suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteSelection {
    All,
    One(Suite),
}

impl SuiteSelection {
    pub fn suites(self) -> Vec<Suite> {
        match self {
            SuiteSelection::All => Suite::ALL.to_vec(),
            SuiteSelection::One(s) => vec![s],
        }
    }
}

impl FromStr for SuiteSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            return Ok(SuiteSelection::All);
        }
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .map(SuiteSelection::One)
            .ok_or_else(|| {
                let names: Vec<&str> = Suite::ALL.iter().map(|x| x.name()).collect();
                domain(format!(
                    "unknown suite '{s}', expected all or one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// Where the expected value of a check comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Closed-form value.
    Analytic,
    /// Independent numerical computation.
    Oracle,
    /// Identity that must hold over random samples.
    Property,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub suite: Suite,
    pub name: &'static str,
    pub passed: bool,
    /// Worst deviation found; `NaN` if the check errored.
    pub worst: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub provenance: Provenance,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub seed: u64,
    /// Sample count for the random property checks.
    pub samples: usize,
    /// Run the two-path checks on the reference geometry instead of the quick one.
    pub full: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            samples: DEFAULT_SAMPLES,
            full: false,
        }
    }
}

/// Worst deviation seen so far and a description of where.
struct Worst {
    value: f64,
    at: String,
    samples: usize,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: 0.0,
            at: String::new(),
            samples: 0,
        }
    }

    fn see(&mut self, deviation: f64, at: impl FnOnce() -> String) {
        self.samples += 1;
        // NaN must win, so compare with a negated test
        if !(deviation <= self.value) {
            self.value = deviation;
            self.at = at();
        }
    }
}

fn stream(seed: u64, name: &str) -> ChaCha8Rng {
    // FNV-1a of the name, mixed into the seed
    let h = name.bytes().fold(0xcbf2_9ce4_8422_2325_u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    });
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

struct Runner<'a> {
    opts: &'a CheckOptions,
    out: Vec<CheckOutcome>,
}

impl Runner<'_> {
    fn check<F>(
        &mut self,
        suite: Suite,
        name: &'static str,
        provenance: Provenance,
        tolerance: f64,
        body: F,
    ) where
        F: FnOnce(&mut ChaCha8Rng, &mut Worst) -> Result<()>,
    {
        let mut rng = stream(self.opts.seed, name);
        let mut worst = Worst::new();
        let outcome = match body(&mut rng, &mut worst) {
            Ok(()) => CheckOutcome {
                suite,
                name,
                passed: worst.value <= tolerance,
                worst: worst.value,
                tolerance,
                samples: worst.samples,
                provenance,
                detail: if worst.at.is_empty() {
                    String::new()
                } else {
                    format!("worst at {}", worst.at)
                },
            },
            Err(e) => CheckOutcome {
                suite,
                name,
                passed: false,
                worst: f64::NAN,
                tolerance,
                samples: worst.samples,
                provenance,
                detail: e.to_string(),
            },
        };
        self.out.push(outcome);
    }
}

/// Run the selected suites in their fixed order.
pub fn run_checks(selection: SuiteSelection, opts: &CheckOptions) -> Vec<CheckOutcome> {
    let mut r = Runner {
        opts,
        out: Vec::new(),
    };
    for suite in selection.suites() {
        match suite {
            Suite::Algebra => algebra(&mut r),
            Suite::Gauge => gauge(&mut r),
            Suite::Vacua => vacua(&mut r),
            Suite::Scattering => scattering(&mut r),
            Suite::Dynamics => dynamics(&mut r),
            Suite::Fringe => fringe(&mut r),
        }
    }
    r.out
}

fn random_flux(rng: &mut ChaCha8Rng, c: &PhysicalConstants) -> Result<FluxTube> {
    FluxTube::new(
        rng.gen_range(-5.0..5.0) * c.phi_m0,
        rng.gen_range(-5.0..5.0) * c.phi_e0,
        1.0,
    )
}

fn algebra(r: &mut Runner) {
    let s = Suite::Algebra;
    let n = r.opts.samples;
    let c = PhysicalConstants::default();

    r.check(s, "vanishing_phase", Provenance::Analytic, 1e-12, |_, w| {
        for alpha in [c.alpha, ALPHA_QUARTER] {
            let k = PhysicalConstants::new(alpha)?;
            let d = witten_charges(1, 0, 0.0, &k);
            let d = DyonCharge::new(d.q, k.g0);
            let f = FluxTube::flux_quanta(1.0, &k)?;
            let v = dyon_phase(&d, &f, 1).value;
            w.see(v.abs(), || format!("alpha = {alpha}"));
        }
        Ok(())
    });

    r.check(
        s,
        "quantised_theta_phase",
        Provenance::Analytic,
        1e-12,
        |_, w| {
            let f = FluxTube::flux_quanta(1.0, &c)?;
            for theta in [0.1, 1.0, PI, 5.0] {
                for wn in -10..=10 {
                    let split = dyon_phase_split(1, 1, theta, &f, wn, &c);
                    let dev = (split.theta_part.value - wn as f64 * theta).abs();
                    w.see(dev, || format!("n = {wn}, theta = {theta}"));
                }
            }
            Ok(())
        },
    );

    // Relative to the size of the two competing terms `|q phi_m| + |g phi_e|`.
    r.check(
        s,
        "theta_periodicity_of_phase",
        Provenance::Property,
        1e-12,
        |rng, w| {
            for _ in 0..n {
                let (nq, ng) = (rng.gen_range(-20..=20), rng.gen_range(-20..=20));
                let theta = rng.gen_range(-TAU..TAU);
                let wn = rng.gen_range(-10..=10);
                let f = random_flux(rng, &c)?;
                let a = witten_charges(nq, ng, theta + TAU, &c);
                let b = witten_charges(nq + ng, ng, theta, &c);
                let scale = (wn as f64).abs() * ((a.q * f.phi_m).abs() + (a.g * f.phi_e).abs());
                let dev = (dyon_phase(&a, &f, wn).value - dyon_phase(&b, &f, wn).value).abs()
                    / scale.max(1.0);
                w.see(dev, || {
                    format!("n_q = {nq}, n_g = {ng}, theta = {theta}, n = {wn}")
                });
            }
            Ok(())
        },
    );

    r.check(
        s,
        "duality_invariance",
        Provenance::Property,
        1e-12,
        |rng, w| {
            for _ in 0..n {
                let d = DyonCharge::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
                let f = FluxTube::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), 1.0)?;
                let xi = rng.gen_range(-PI..PI);
                let wn = rng.gen_range(-5..=5);
                let (d2, f2) = duality_rotate(&d, &f, xi);
                let scale = (wn as f64).abs() * ((d.q * f.phi_m).abs() + (d.g * f.phi_e).abs());
                let dev = (dyon_phase(&d2, &f2, wn).value - dyon_phase(&d, &f, wn).value).abs()
                    / scale.max(1e-300);
                w.see(dev, || format!("q = {}, g = {}, xi = {xi}", d.q, d.g));
            }
            Ok(())
        },
    );

    r.check(
        s,
        "flux_rule_triviality",
        Provenance::Property,
        1e-9,
        |rng, w| {
            for _ in 0..n {
                let k: [i64; 4] = std::array::from_fn(|_| rng.gen_range(-10..=10));
                let wn = rng.gen_range(-5..=5);
                let t1 = rng.gen_range(-10.0..10.0);
                let t2 = rng.gen_range(-10.0..10.0);
                let (p1, big_n) = flux_rule_phase(k[0], k[1], k[2], k[3], t1, wn, &c);
                let (p2, _) = flux_rule_phase(k[0], k[1], k[2], k[3], t2, wn, &c);
                let at = || format!("integers {k:?}, n = {wn}, theta = {t1}");
                w.see((p1.value - TAU * big_n as f64).abs(), at);
                w.see((p1.value - p2.value).abs(), || {
                    format!("integers {k:?}, theta {t1} vs {t2}")
                });
                w.see(circular_distance(p1.reduced, 0.0), at);
            }
            Ok(())
        },
    );

    r.check(
        s,
        "winding_additivity",
        Provenance::Property,
        1e-12,
        |rng, w| {
            for _ in 0..n {
                let d = witten_charges(
                    rng.gen_range(-10..=10),
                    rng.gen_range(-10..=10),
                    rng.gen_range(-10.0..10.0),
                    &c,
                );
                let f = random_flux(rng, &c)?;
                let (n1, n2) = (rng.gen_range(-50..=50), rng.gen_range(-50..=50));
                let sum = dyon_phase(&d, &f, n1).value + dyon_phase(&d, &f, n2).value;
                let whole = dyon_phase(&d, &f, n1 + n2).value;
                let scale = 100.0 * ((d.q * f.phi_m).abs() + (d.g * f.phi_e).abs());
                w.see((whole - sum).abs() / scale.max(1.0), || {
                    format!("n1 = {n1}, n2 = {n2}")
                });
            }
            Ok(())
        },
    );

    r.check(
        s,
        "phase_split_recombines",
        Provenance::Property,
        1e-12,
        |rng, w| {
            for _ in 0..n {
                let (nq, ng) = (rng.gen_range(-10..=10), rng.gen_range(-10..=10));
                let theta = rng.gen_range(-10.0..10.0);
                let wn = rng.gen_range(-5..=5);
                let f = random_flux(rng, &c)?;
                let split = dyon_phase_split(nq, ng, theta, &f, wn, &c);
                let d = witten_charges(nq, ng, theta, &c);
                let direct = dyon_phase(&d, &f, wn).value;
                let scale = (wn as f64).abs() * ((d.q * f.phi_m).abs() + (d.g * f.phi_e).abs());
                w.see(
                    (split.total().value - direct).abs() / scale.max(1.0),
                    || format!("n_q = {nq}, n_g = {ng}, theta = {theta}"),
                );
            }
            Ok(())
        },
    );

    r.check(
        s,
        "theta_phase_through_g",
        Provenance::Property,
        1e-12,
        |rng, w| {
            for _ in 0..n {
                let ng = rng.gen_range(-20..=20);
                let wn = rng.gen_range(-10..=10);
                let theta = rng.gen_range(-10.0..10.0);
                let phi_m = rng.gen_range(-5.0..5.0) * c.phi_m0;
                let a = theta_phase(wn, ng, phi_m, theta, &c).value;
                let b = theta_phase_from_g(wn, ng as f64 * c.g0, phi_m, theta, &c).value;
                w.see((a - b).abs() / a.abs().max(1.0), || {
                    format!("n = {wn}, n_g = {ng}, theta = {theta}")
                });
            }
            Ok(())
        },
    );

    r.check(s, "sz_antisymmetry", Provenance::Property, 0.0, |rng, w| {
        for _ in 0..n {
            let d1 = DyonCharge::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let d2 = DyonCharge::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            w.see((sz_pairing(&d1, &d2) + sz_pairing(&d2, &d1)).abs(), || {
                format!("({}, {}) and ({}, {})", d1.q, d1.g, d2.q, d2.g)
            });
        }
        Ok(())
    });

    r.check(
        s,
        "sz_theta_independence",
        Provenance::Property,
        1e-9,
        |rng, w| {
            for _ in 0..n {
                let k: [i64; 4] = std::array::from_fn(|_| rng.gen_range(-20..=20));
                let theta = rng.gen_range(-10.0..10.0);
                let d1 = witten_charges(k[0], k[1], theta, &c);
                let d2 = witten_charges(k[2], k[3], theta, &c);
                let expected = (k[0] * k[3] - k[2] * k[1]) as f64 / 2.0;
                w.see((sz_pairing(&d1, &d2) - expected).abs(), || {
                    format!("integers {k:?}, theta = {theta}")
                });
            }
            Ok(())
        },
    );

    r.check(
        s,
        "witten_theta_shift",
        Provenance::Property,
        1e-12,
        |rng, w| {
            for _ in 0..n {
                let (nq, ng) = (rng.gen_range(-20..=20), rng.gen_range(-20..=20));
                let theta = rng.gen_range(-10.0..10.0);
                let a = witten_charges(nq, ng, theta + TAU, &c);
                let b = witten_charges(nq + ng, ng, theta, &c);
                let dev = (a.q - b.q).abs().max((a.g - b.g).abs());
                w.see(dev, || format!("n_q = {nq}, n_g = {ng}, theta = {theta}"));
            }
            Ok(())
        },
    );
}

/// Star-shaped loop around a random centre traversed `turns` times, and the
/// number of times it winds around the origin by construction.
fn random_loop(rng: &mut ChaCha8Rng) -> Result<(PlanePath, i64)> {
    let r0 = rng.gen_range(1.5..6.0);
    let wobble = rng.gen_range(0.0..0.3);
    let lobes = rng.gen_range(2..7) as f64;
    let offset = rng.gen_range(0.0..TAU);
    let encloses = rng.gen_bool(0.7);
    let dist = if encloses {
        rng.gen_range(0.0..0.4) * r0 * (1.0 - wobble)
    } else {
        r0 * (1.0 + wobble) + rng.gen_range(0.5..3.0)
    };
    let dir = rng.gen_range(0.0..TAU);
    let centre = PlanePoint::new(dist * dir.cos(), dist * dir.sin());
    let mut turns: i64 = rng.gen_range(-3..=2);
    if turns >= 0 {
        turns += 1;
    }
    const PER_TURN: usize = 96;
    let total = PER_TURN * turns.unsigned_abs() as usize;
    let sign = turns.signum() as f64;
    let points = (0..total)
        .map(|i| {
            let t = sign * TAU * i as f64 / PER_TURN as f64;
            let radius = r0 * (1.0 + wobble * (lobes * t + offset).sin());
            PlanePoint::new(centre.x + radius * t.cos(), centre.y + radius * t.sin())
        })
        .collect();
    let path = PlanePath::closed_ring(points)?;
    Ok((path, if encloses { turns } else { 0 }))
}

fn gauge(r: &mut Runner) {
    let s = Suite::Gauge;
    let n = r.opts.samples;
    let loops = (n / 20).max(10);
    let c = PhysicalConstants::default();

    r.check(
        s,
        "beta_loop_integral",
        Provenance::Oracle,
        1e-8,
        |rng, w| {
            for _ in 0..loops {
                let (path, winding) = random_loop(rng)?;
                let theta = rng.gen_range(-10.0..10.0);
                let v = line_integral(|p| Ok(beta_gradient(theta, p)), &path, path.default_step())?;
                w.see((v - winding as f64 * theta).abs(), || {
                    format!("winding {winding}, theta = {theta}")
                });
            }
            Ok(())
        },
    );

    r.check(
        s,
        "dyon_loop_integral",
        Provenance::Oracle,
        1e-8,
        |rng, w| {
            for _ in 0..loops {
                let (path, winding) = random_loop(rng)?;
                let theta = rng.gen_range(-10.0..10.0);
                let d = witten_charges(rng.gen_range(-3..=3), rng.gen_range(-3..=3), theta, &c);
                let f = flux_from_integers(
                    rng.gen_range(-3..=3),
                    rng.gen_range(-3..=3),
                    theta,
                    0.25,
                    &c,
                )?;
                let v = line_integral(
                    |p| conjugate_momentum_field(&d, &f, p),
                    &path,
                    path.default_step(),
                )?;
                let expected = winding as f64 * (d.q * f.phi_m - d.g * f.phi_e);
                w.see((v - expected).abs(), || {
                    format!("winding {winding}, expected {expected}")
                });
            }
            Ok(())
        },
    );

    r.check(
        s,
        "concatenation_additivity",
        Provenance::Property,
        1e-10,
        |rng, w| {
            for _ in 0..loops {
                let (path, _) = random_loop(rng)?;
                let pts = path.points();
                let cut = rng.gen_range(1..pts.len() - 1);
                let a = PlanePath::open(pts[..=cut].to_vec())?;
                let b = PlanePath::open(pts[cut..].to_vec())?;
                let theta = rng.gen_range(-10.0..10.0);
                let field = |p| Ok(beta_gradient(theta, p));
                let step = path.default_step();
                let whole = line_integral(field, &a.concat(&b)?, step)?;
                let parts = line_integral(field, &a, step)? + line_integral(field, &b, step)?;
                w.see((whole - parts).abs(), || {
                    format!("cut at {cut} of {}", pts.len())
                });
            }
            Ok(())
        },
    );

    r.check(
        s,
        "curl_free_squares",
        Provenance::Property,
        1e-8,
        |rng, w| {
            for _ in 0..n / 4 {
                let d = witten_charges(
                    rng.gen_range(-5..=5),
                    rng.gen_range(-5..=5),
                    rng.gen_range(-10.0..10.0),
                    &c,
                );
                let f = random_flux(rng, &c)?.with_radius(0.1)?;
                let side = rng.gen_range(1e-3..0.5);
                let r0 = rng.gen_range(0.2 + side..10.0);
                let a = rng.gen_range(0.0..TAU);
                let (x, y) = (r0 * a.cos(), r0 * a.sin());
                let h = 0.5 * side;
                let square = PlanePath::closed_ring(vec![
                    PlanePoint::new(x - h, y - h),
                    PlanePoint::new(x + h, y - h),
                    PlanePoint::new(x + h, y + h),
                    PlanePoint::new(x - h, y + h),
                ])?;
                let v = line_integral(
                    |p| conjugate_momentum_field(&d, &f, p),
                    &square,
                    side / 16.0,
                )?;
                w.see(v.abs(), || format!("square of side {side} at ({x}, {y})"));
            }
            Ok(())
        },
    );
}

fn vacua(r: &mut Runner) {
    let s = Suite::Vacua;
    let n = r.opts.samples;

    r.check(
        s,
        "shift_eigenvalue",
        Provenance::Analytic,
        1e-12,
        |rng, w| {
            for m in [10, 100, 1000, 10_000] {
                for _ in 0..5 {
                    let theta = rng.gen_range(-TAU..TAU);
                    let v = build_theta_vacuum(theta, m)?;
                    w.see(eigenvalue_residual(&v)?, || {
                        format!("M = {m}, theta = {theta}")
                    });
                }
            }
            Ok(())
        },
    );

    r.check(
        s,
        "theta_periodicity",
        Provenance::Property,
        1e-12,
        |rng, w| {
            for m in [10, 100, 1000] {
                for _ in 0..5 {
                    let theta = rng.gen_range(-TAU..TAU);
                    let a = build_theta_vacuum(theta, m)?;
                    let b = build_theta_vacuum(theta + TAU, m)?;
                    let dev = max_gap(a.state().amplitudes(), b.state().amplitudes());
                    w.see(dev, || format!("M = {m}, theta = {theta}"));
                }
            }
            Ok(())
        },
    );

    r.check(
        s,
        "state_factor_reindexing",
        Provenance::Property,
        1e-12,
        |rng, w| {
            for _ in 0..n {
                let k = rng.gen_range(-100..=100);
                let theta = rng.gen_range(-10.0..10.0);
                let phi = rng.gen_range(0.0..TAU);
                let dev = (dyon_state_factor(k, theta, phi + TAU)
                    - dyon_state_factor(k + 1, theta, phi))
                .norm();
                w.see(dev, || format!("n = {k}, theta = {theta}, phi = {phi}"));
            }
            Ok(())
        },
    );
}

fn scattering(r: &mut Runner) {
    let s = Suite::Scattering;
    let n = r.opts.samples;

    r.check(
        s,
        "half_turn_spot_value",
        Provenance::Analytic,
        1e-6,
        |_, w| {
            let v = theta_cross_section(PI, 1.0, PI)?;
            w.see((v - 1.0 / TAU).abs(), || format!("value {v}"));
            Ok(())
        },
    );

    // Relative to the largest value over theta at that angle.
    r.check(
        s,
        "theta_periodicity",
        Provenance::Property,
        1e-12,
        |rng, w| {
            for _ in 0..n {
                let theta = rng.gen_range(-10.0..10.0);
                let k = rng.gen_range(0.1..10.0);
                let phi = rng.gen_range(0.1..TAU - 0.1);
                let scale = 1.0 / (TAU * k * (phi / 2.0).sin().powi(2));
                let dev = (theta_cross_section(theta + TAU, k, phi)?
                    - theta_cross_section(theta, k, phi)?)
                .abs();
                w.see(dev / scale, || {
                    format!("theta = {theta}, k = {k}, phi = {phi}")
                });
            }
            Ok(())
        },
    );

    r.check(
        s,
        "wave_number_scaling",
        Provenance::Property,
        1e-12,
        |rng, w| {
            for _ in 0..n {
                let theta = rng.gen_range(-10.0..10.0);
                let k = rng.gen_range(0.1..10.0);
                let phi = rng.gen_range(0.1..TAU - 0.1);
                let unit = theta_cross_section(theta, 1.0, phi)?;
                let v = theta_cross_section(theta, k, phi)?;
                w.see((v - unit / k).abs() / unit.max(1e-300), || {
                    format!("theta = {theta}, k = {k}, phi = {phi}")
                });
            }
            Ok(())
        },
    );

    r.check(
        s,
        "reflection_symmetry",
        Provenance::Property,
        1e-12,
        |rng, w| {
            for _ in 0..n {
                let theta = rng.gen_range(-10.0..10.0);
                let k = rng.gen_range(0.1..10.0);
                let phi = rng.gen_range(0.1..PI);
                let a = theta_cross_section(theta, k, phi)?;
                let b = theta_cross_section(theta, k, TAU - phi)?;
                let scale = 1.0 / (TAU * k * (phi / 2.0).sin().powi(2));
                w.see((a - b).abs() / scale, || {
                    format!("theta = {theta}, phi = {phi}")
                });
            }
            Ok(())
        },
    );

    r.check(
        s,
        "partial_wave_oracle",
        Provenance::Oracle,
        1e-3,
        |_, w| {
            let opts = PartialWaveOptions::default();
            for i in 1..=9 {
                let alpha = i as f64 / 10.0;
                for j in 0..=10 {
                    let phi = FRAC_PI_6 + (PI - FRAC_PI_6) * j as f64 / 10.0;
                    let closed = ab_cross_section(alpha, 1.0, phi)?;
                    let pw = partial_wave_cross_section(alpha, 1.0, phi, &opts)?.cross_section;
                    w.see((pw - closed).abs() / closed, || {
                        format!("alpha = {alpha}, phi = {phi}")
                    });
                }
            }
            Ok(())
        },
    );

    r.check(
        s,
        "cesaro_agrees_with_abel",
        Provenance::Oracle,
        1e-2,
        |_, w| {
            let abel = PartialWaveOptions::default();
            let cesaro = PartialWaveOptions {
                summation: Summation::Cesaro,
                tolerance: 1e-2,
                ..abel
            };
            for alpha in [0.2, 0.5, 0.8] {
                for phi in [FRAC_PI_2, 2.0, PI] {
                    let a = partial_wave_cross_section(alpha, 1.0, phi, &abel)?.cross_section;
                    let b = partial_wave_cross_section(alpha, 1.0, phi, &cesaro)?.cross_section;
                    w.see((a - b).abs() / a, || {
                        format!("alpha = {alpha}, phi = {phi}")
                    });
                }
            }
            Ok(())
        },
    );

    r.check(
        s,
        "flux_complement_symmetry",
        Provenance::Oracle,
        1e-3,
        |_, w| {
            let opts = PartialWaveOptions::default();
            for i in 1..=9 {
                let alpha = i as f64 / 10.0;
                let a = partial_wave_cross_section(alpha, 1.0, PI, &opts)?.cross_section;
                let b = partial_wave_cross_section(1.0 - alpha, 1.0, PI, &opts)?.cross_section;
                w.see((a - b).abs() / a, || format!("alpha = {alpha}"));
            }
            Ok(())
        },
    );
}

/// Tube charges giving a pure magnetic coupling with the requested `alpha_eff`.
fn coupling(alpha: f64, radius_eps: f64) -> Result<(DyonCharge, FluxTube)> {
    Ok((
        DyonCharge::new(1.0, 0.0),
        FluxTube::new(TAU * alpha, 0.0, radius_eps)?,
    ))
}

/// Vacuum-angle case: elementary dyon with `theta = 1` around a flux-quantum tube.
fn vacuum_case(radius_eps: f64) -> Result<(DyonCharge, FluxTube)> {
    let c = PhysicalConstants::default();
    Ok((
        witten_charges(1, 1, 1.0, &c),
        FluxTube::flux_quanta(radius_eps, &c)?,
    ))
}

fn dynamics(r: &mut Runner) {
    let s = Suite::Dynamics;
    let full = r.opts.full;

    r.check(
        s,
        "plaquette_circulation",
        Provenance::Analytic,
        1e-10,
        |rng, w| {
            let grid = Grid2D::centered(64, 1.0, 1.0)?;
            let mut cases = vec![vacuum_case(1.0)?];
            for _ in 0..4 {
                cases.push(coupling(rng.gen_range(-2.0..2.0), 1.0)?);
            }
            for (d, f) in &cases {
                let alpha = effective_alpha(d, f);
                let links = build_link_phases(&grid, d, f)?;
                let rep = plaquette_report(&grid, &links, alpha);
                w.see(rep.max_exterior_deviation, || {
                    format!("exterior, alpha = {alpha}")
                });
                w.see(rep.tube_deviation, || format!("tube, alpha = {alpha}"));
            }
            Ok(())
        },
    );

    r.check(
        s,
        "gauge_covariance",
        Provenance::Property,
        1e-10,
        |rng, w| {
            let grid = Arc::new(Grid2D::centered(48, 1.0, 1.0)?);
            let (d, f) = coupling(rng.gen_range(0.05..0.95), 1.0)?;
            let links = build_link_phases(&grid, &d, &f)?;
            let lambda: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-PI..PI)).collect();
            let packet = Packet {
                center: [14.0, 20.0],
                sigma: 4.0,
                k: [0.6, 0.2],
            };
            let mut a = WaveField::gaussian(grid.clone(), &packet)?;
            let mut b = a.clone();
            b.apply_phase(&lambda);
            let cfg = |links| EvolveConfig {
                mass: 1.0,
                dt: 0.25,
                steps: 25,
                absorb_margin: 0,
                links,
                potential: None,
            };
            let ea = Evolver::new(grid.clone(), &cfg(links.clone()))?;
            let eb = Evolver::new(grid.clone(), &cfg(links.gauge_transformed(&grid, &lambda)))?;
            for chunk in 1..=4 {
                ea.run(&mut a)?;
                eb.run(&mut b)?;
                let dev = a
                    .data()
                    .iter()
                    .zip(b.data())
                    .map(|(x, y)| (x.norm_sqr() - y.norm_sqr()).abs())
                    .fold(0.0, f64::max);
                w.see(dev, || format!("after {} steps", 25 * chunk));
            }
            Ok(())
        },
    );

    r.check(
        s,
        "norm_conservation",
        Provenance::Property,
        1e-10,
        |rng, w| {
            let grid = Arc::new(Grid2D::centered(64, 1.0, 1.0)?);
            let (d, f) = coupling(rng.gen_range(0.05..0.95), 1.0)?;
            let packet = Packet {
                center: [20.0, 28.0],
                sigma: 5.0,
                k: [0.8, 0.1],
            };
            let mut psi = WaveField::gaussian(grid.clone(), &packet)?;
            let cfg = EvolveConfig {
                mass: 1.0,
                dt: 0.5,
                steps: 200,
                absorb_margin: 0,
                links: build_link_phases(&grid, &d, &f)?,
                potential: None,
            };
            let stats = Evolver::new(grid, &cfg)?.run(&mut psi)?;
            w.see(stats.max_step_drift, || format!("{} steps", stats.steps));
            Ok(())
        },
    );

    let geometry = if full {
        TwoPathGeometry::reference()
    } else {
        TwoPathGeometry::quick()
    };
    // reference runs are shared by the two-path checks
    let experiment = OnceCell::new();
    let setup = || -> Result<&TwoPathExperiment> {
        experiment
            .get_or_init(|| TwoPathExperiment::new(geometry).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|m| Error::InvalidRun(m.clone()))
    };

    let mut measured_01 = None;
    r.check(s, "two_path_phase", Provenance::Oracle, 1e-2, |_, w| {
        let exp = setup()?;
        let mut cases = Vec::new();
        for alpha in [0.1, 0.25, 0.5] {
            cases.push((
                format!("alpha = {alpha}"),
                coupling(alpha, geometry.radius_eps)?,
            ));
        }
        cases.push((
            "theta = 1 vacuum case".to_string(),
            vacuum_case(geometry.radius_eps)?,
        ));
        for (label, (d, f)) in cases {
            let res = exp.measure(&d, &f)?;
            if (res.alpha_eff - 0.1).abs() < 1e-15 {
                measured_01 = Some(res.measured_phase);
            }
            w.see(res.error, || format!("{label} (overlap estimator)"));
            w.see(
                circular_distance(res.fringe_phase, res.expected_phase),
                || format!("{label} (fringe estimator)"),
            );
            w.see(
                res.plaquettes
                    .max_exterior_deviation
                    .max(res.plaquettes.tube_deviation),
                || format!("{label} (plaquettes)"),
            );
        }
        Ok(())
    });

    r.check(
        s,
        "two_path_flux_periodicity",
        Provenance::Property,
        1e-2,
        |_, w| {
            let exp = setup()?;
            let base = match measured_01 {
                Some(v) => v,
                None => {
                    let (d, f) = coupling(0.1, geometry.radius_eps)?;
                    exp.measure(&d, &f)?.measured_phase
                }
            };
            let (d, f) = coupling(1.1, geometry.radius_eps)?;
            let shifted = exp.measure(&d, &f)?.measured_phase;
            w.see(circular_distance(base, shifted), || {
                "alpha = 0.1 against 1.1".to_string()
            });
            Ok(())
        },
    );

    r.check(
        s,
        "tube_grazing_run_rejected",
        Provenance::Analytic,
        0.0,
        |_, w| {
            let g = TwoPathGeometry {
                source_y: 2.0,
                ..TwoPathGeometry::quick()
            };
            let (d, f) = coupling(0.25, g.radius_eps)?;
            let miss = match crate::dynamics::two_path_phase(&d, &f, &g) {
                Err(Error::InvalidRun(_)) => 0.0,
                _ => 1.0,
            };
            w.see(miss, || {
                "packets aimed at the tube were not rejected".to_string()
            });
            Ok(())
        },
    );
}

fn fringe(r: &mut Runner) {
    let s = Suite::Fringe;
    let base = SlitGeometry {
        l: 1000.0,
        d: 10.0,
        w: 1.0,
        lambda: 1.0,
        delta0_bar: 0.0,
    };

    r.check(s, "half_turn_shift", Provenance::Analytic, 1.0, |_, w| {
        let res = fringe_shift(&base, PI)?;
        w.see((res.delta_x - 50.0).abs(), || {
            format!("delta_x = {}", res.delta_x)
        });
        Ok(())
    });

    // In units of the fringe period.
    r.check(s, "shift_formula", Provenance::Analytic, 0.02, |rng, w| {
        let mut cases: Vec<(SlitGeometry, f64)> =
            [0.0, FRAC_PI_2, PI].iter().map(|&t| (base, t)).collect();
        for _ in 0..8 {
            let g = SlitGeometry {
                l: rng.gen_range(300.0..2000.0),
                d: rng.gen_range(4.0..12.0),
                w: rng.gen_range(0.2..1.5),
                lambda: rng.gen_range(0.3..2.0),
                delta0_bar: rng.gen_range(-0.5..0.5),
            };
            cases.push((g, rng.gen_range(-PI..PI)));
        }
        for (g, theta) in cases {
            let res = fringe_shift(&g, theta)?;
            w.see((res.delta_x - res.predicted).abs() / res.period, || {
                format!("theta = {theta}, geometry {g:?}")
            });
        }
        Ok(())
    });

    r.check(
        s,
        "full_turn_periodicity",
        Provenance::Property,
        1e-9,
        |rng, w| {
            for _ in 0..4 {
                let theta = rng.gen_range(-PI..PI);
                let g = SlitGeometry {
                    delta0_bar: rng.gen_range(-0.5..0.5),
                    ..base
                };
                let a = fringe_shift(&g, theta)?;
                let b = fringe_shift(&g, theta + TAU)?;
                let peak = a.pattern.iter().map(|p| p.1).fold(0.0, f64::max);
                let pattern = a
                    .pattern
                    .iter()
                    .zip(&b.pattern)
                    .map(|(p, q)| (p.1 - q.1).abs() / peak)
                    .fold(0.0, f64::max);
                w.see(pattern, || format!("pattern, theta = {theta}"));
                w.see(
                    ((b.delta_x - a.delta_x) - a.period).abs() / a.period,
                    || format!("shift, theta = {theta}"),
                );
            }
            Ok(())
        },
    );
}

fn max_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
