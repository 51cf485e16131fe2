//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints its PASS/FAIL line; exits non-zero if any fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, PI, TAU};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use dyonlab_core::dynamics::{
    build_link_phases, fringe_shift, plaquette_report, EvolveConfig, Evolver, Grid2D, Packet,
    SlitGeometry, TwoPathExperiment, TwoPathGeometry, WaveField,
};
use dyonlab_core::gauge::beta_gradient;
use dyonlab_core::phase::{dyon_phase, dyon_phase_split, flux_rule_phase};
use dyonlab_core::scattering::{
    partial_wave_cross_section, theta_cross_section, PartialWaveOptions,
};
use dyonlab_core::units::duality_rotate;
use dyonlab_core::vacua::{build_theta_vacuum, dyon_state_factor, eigenvalue_residual};
use dyonlab_core::{
    line_integral, witten_charges, DyonCharge, FluxTube, PhysicalConstants, PlanePath, PlanePoint,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;

struct Verdict {
    passed: bool,
    summary: String,
    budget: Option<Duration>,
}

fn verdict(passed: bool, summary: String) -> Verdict {
    Verdict {
        passed,
        summary,
        budget: None,
    }
}

fn rng(criterion: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED + criterion)
}

fn vanishing_phase() -> Verdict {
    let c = PhysicalConstants::default();
    let d = DyonCharge::new(c.e, c.g0);
    let f = FluxTube::flux_quanta(1.0, &c).unwrap();
    let v = dyon_phase(&d, &f, 1).value;
    verdict(v.abs() < 1e-12, format!("|delta| = {:.3e}", v.abs()))
}

fn quantised_theta_phase() -> Verdict {
    let c = PhysicalConstants::default();
    let f = FluxTube::flux_quanta(1.0, &c).unwrap();
    let mut worst: f64 = 0.0;
    for theta in [0.1, 1.0, PI, 5.0] {
        for n in -10..=10 {
            let split = dyon_phase_split(1, 1, theta, &f, n, &c);
            worst = worst.max((split.theta_part.value - n as f64 * theta).abs());
        }
    }
    verdict(
        worst <= 1e-12,
        format!("max |theta part - n theta| = {worst:.3e}"),
    )
}

/// `|a - b|` relative to the magnitude of the two terms of the phase.
fn phase_gap(d: &DyonCharge, f: &FluxTube, n: i64, a: f64, b: f64) -> f64 {
    let scale = (n as f64).abs() * ((d.q * f.phi_m).abs() + (d.g * f.phi_e).abs());
    (a - b).abs() / scale.max(1.0)
}

fn theta_periodicity() -> Verdict {
    let c = PhysicalConstants::default();
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let nq = r.gen_range(-20..=20);
        let ng = r.gen_range(-20..=20);
        let theta = r.gen_range(-2.0 * TAU..2.0 * TAU);
        let n = r.gen_range(-10..=10);
        let f = FluxTube::new(
            r.gen_range(-5.0..5.0) * c.phi_m0,
            r.gen_range(-5.0..5.0) * c.phi_e0,
            1.0,
        )
        .unwrap();
        let shifted = witten_charges(nq, ng, theta + TAU, &c);
        let relabelled = witten_charges(nq + ng, ng, theta, &c);
        let a = dyon_phase(&shifted, &f, n).value;
        let b = dyon_phase(&relabelled, &f, n).value;
        worst = worst.max(phase_gap(&shifted, &f, n, a, b));
    }
    verdict(
        worst <= 1e-12,
        format!("1000 samples, max relative gap {worst:.3e}"),
    )
}

fn duality_invariance() -> Verdict {
    let mut r = rng(4);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let d = DyonCharge::new(r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0));
        let f = FluxTube::new(r.gen_range(-10.0..10.0), r.gen_range(-10.0..10.0), 1.0).unwrap();
        let xi = r.gen_range(-PI..PI);
        let n = r.gen_range(1..=5);
        let (d2, f2) = duality_rotate(&d, &f, xi);
        let a = dyon_phase(&d, &f, n).value;
        let b = dyon_phase(&d2, &f2, n).value;
        let scale = n as f64 * ((d.q * f.phi_m).abs() + (d.g * f.phi_e).abs());
        worst = worst.max((a - b).abs() / scale);
    }
    verdict(
        worst <= 1e-12,
        format!("1000 samples, max relative change {worst:.3e}"),
    )
}

fn flux_rule_triviality() -> Verdict {
    let c = PhysicalConstants::default();
    let mut r = rng(5);
    let mut worst_value: f64 = 0.0;
    let mut worst_theta: f64 = 0.0;
    for _ in 0..1000 {
        let k: [i64; 4] = std::array::from_fn(|_| r.gen_range(-10..=10));
        let n = r.gen_range(-5..=5);
        let (t1, t2) = (r.gen_range(-10.0..10.0), r.gen_range(-10.0..10.0));
        let (p1, _) = flux_rule_phase(k[0], k[1], k[2], k[3], t1, n, &c);
        let (p2, _) = flux_rule_phase(k[0], k[1], k[2], k[3], t2, n, &c);
        // N = n (n_q n_phi_m - n_g n_phi_e)
        let big_n = n * (k[0] * k[3] - k[1] * k[2]);
        worst_value = worst_value.max((p1.value - TAU * big_n as f64).abs());
        worst_theta = worst_theta.max((p1.value - p2.value).abs());
    }
    verdict(
        worst_value <= 1e-9 && worst_theta <= 1e-9,
        format!("1000 samples, |phase - 2 pi N| <= {worst_value:.3e}, theta dependence <= {worst_theta:.3e}"),
    )
}

/// Random ellipse traversed `turns` times and its winding about the origin.
fn random_ellipse(r: &mut ChaCha8Rng) -> (PlanePath, i64) {
    let a = r.gen_range(1.0..8.0);
    let b = a * r.gen_range(0.4..1.0);
    let tilt = r.gen_range(0.0..PI);
    let centre = if r.gen_bool(0.6) {
        // inside: well within the inscribed circle of radius b
        let s = r.gen_range(0.0..0.5) * b;
        let d = r.gen_range(0.0..TAU);
        (s * d.cos(), s * d.sin())
    } else {
        let s = a + r.gen_range(0.5..5.0);
        let d = r.gen_range(0.0..TAU);
        (s * d.cos(), s * d.sin())
    };
    let mut turns: i64 = r.gen_range(-3..=2);
    if turns >= 0 {
        turns += 1;
    }
    let per_turn = 200;
    let total = per_turn * turns.unsigned_abs() as usize;
    let (st, ct) = tilt.sin_cos();
    let pts: Vec<PlanePoint> = (0..total)
        .map(|i| {
            let t = turns.signum() as f64 * TAU * i as f64 / per_turn as f64;
            let (u, v) = (a * t.cos(), b * t.sin());
            PlanePoint::new(centre.0 + ct * u - st * v, centre.1 + st * u + ct * v)
        })
        .collect();
    // origin inside the ellipse?
    let (ox, oy) = (-centre.0, -centre.1);
    let (u, v) = (ct * ox + st * oy, -st * ox + ct * oy);
    let inside = (u / a).powi(2) + (v / b).powi(2) < 1.0;
    let path = PlanePath::closed_ring(pts).unwrap();
    (path, if inside { turns } else { 0 })
}

fn loop_integral() -> Verdict {
    let start = Instant::now();
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    let mut enclosing = 0;
    for _ in 0..50 {
        let (path, winding) = random_ellipse(&mut r);
        enclosing += (winding != 0) as usize;
        let theta = r.gen_range(-10.0..10.0);
        let v = line_integral(|p| Ok(beta_gradient(theta, p)), &path, path.default_step()).unwrap();
        worst = worst.max((v - winding as f64 * theta).abs());
    }
    let elapsed = start.elapsed();
    Verdict {
        passed: worst <= 1e-8 && elapsed < Duration::from_secs(10),
        summary: format!(
            "50 loops ({enclosing} enclosing), max |integral - n theta| = {worst:.3e}"
        ),
        budget: Some(Duration::from_secs(10)),
    }
}

fn solver_oracle() -> Verdict {
    let start = Instant::now();
    let geometry = TwoPathGeometry::reference();
    let c = PhysicalConstants::default();
    let mut cases: Vec<(String, DyonCharge, FluxTube)> = [0.1, 0.25, 0.5]
        .iter()
        .map(|&a| {
            let f = FluxTube::new(TAU * a, 0.0, geometry.radius_eps).unwrap();
            (format!("alpha {a}"), DyonCharge::new(1.0, 0.0), f)
        })
        .collect();
    cases.push((
        "theta = 1".into(),
        witten_charges(1, 1, 1.0, &c),
        FluxTube::flux_quanta(geometry.radius_eps, &c).unwrap(),
    ));

    let exp = TwoPathExperiment::new(geometry).unwrap();
    let grid = exp.grid().clone();
    let mut phase_err: f64 = 0.0;
    let mut plaq: f64 = 0.0;
    let mut parts = Vec::new();
    for (label, d, f) in &cases {
        let expected = (d.q * f.phi_m - d.g * f.phi_e).rem_euclid(TAU);
        let res = exp.measure(d, f).unwrap();
        let err = circular(res.measured_phase, expected);
        phase_err = phase_err.max(err);
        let links = build_link_phases(&grid, d, f).unwrap();
        let rep = plaquette_report(&grid, &links, (d.q * f.phi_m - d.g * f.phi_e) / TAU);
        plaq = plaq.max(rep.max_exterior_deviation).max(rep.tube_deviation);
        parts.push(format!("{label}: {err:.1e}"));
    }
    let covariance = gauge_covariance(&grid);
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(300);
    Verdict {
        passed: phase_err <= 1e-2 && plaq <= 1e-10 && covariance <= 1e-10 && elapsed < budget,
        summary: format!(
            "phase errors [{}] rad, plaquettes {plaq:.1e}, gauge covariance {covariance:.1e}",
            parts.join(", ")
        ),
        budget: Some(budget),
    }
}

fn circular(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Largest `| |psi|^2 - |psi'|^2 |` between a run and its random gauge transform.
fn gauge_covariance(grid: &Arc<Grid2D>) -> f64 {
    let mut r = rng(7);
    let f = FluxTube::new(TAU * 0.37, 0.0, grid.radius_eps).unwrap();
    let d = DyonCharge::new(1.0, 0.0);
    let links = build_link_phases(grid, &d, &f).unwrap();
    let lambda: Vec<f64> = (0..grid.len()).map(|_| r.gen_range(-PI..PI)).collect();
    let centre = grid.tube_point();
    let packet = Packet {
        center: [centre.x - 40.0, centre.y + 15.0],
        sigma: 10.0,
        k: [0.7, 0.0],
    };
    let mut a = WaveField::gaussian(grid.clone(), &packet).unwrap();
    let mut b = a.clone();
    b.apply_phase(&lambda);
    let cfg = |links| EvolveConfig {
        mass: 1.0,
        dt: 0.2,
        steps: 100,
        absorb_margin: 24,
        links,
        potential: None,
    };
    let ea = Evolver::new(grid.clone(), &cfg(links.clone())).unwrap();
    let eb = Evolver::new(grid.clone(), &cfg(links.gauge_transformed(grid, &lambda))).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..2 {
        ea.run(&mut a).unwrap();
        eb.run(&mut b).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            worst = worst.max((x.norm_sqr() - y.norm_sqr()).abs());
        }
    }
    worst
}

fn fringe() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for delta0_bar in [0.0, 0.1] {
        let g = SlitGeometry {
            l: 1000.0,
            d: 10.0,
            w: 1.0,
            lambda: 1.0,
            delta0_bar,
        };
        for theta in [0.0, FRAC_PI_2, PI] {
            let period = g.l * g.lambda / g.d;
            let predicted = period * (delta0_bar + theta / TAU);
            let res = fringe_shift(&g, theta).unwrap();
            worst = worst.max((res.delta_x - predicted).abs() / period);
        }
    }
    let budget = Duration::from_secs(30);
    Verdict {
        passed: worst <= 0.02 && start.elapsed() < budget,
        summary: format!("max |dx - predicted| = {worst:.3e} periods"),
        budget: Some(budget),
    }
}

fn scattering_oracle() -> Verdict {
    let start = Instant::now();
    let opts = PartialWaveOptions::default();
    let mut worst: f64 = 0.0;
    for i in 1..=9 {
        let alpha = i as f64 / 10.0;
        for j in 0..=20 {
            let phi = FRAC_PI_6 + (PI - FRAC_PI_6) * j as f64 / 20.0;
            let closed = (PI * alpha).sin().powi(2) / (TAU * (phi / 2.0).sin().powi(2));
            let pw = partial_wave_cross_section(alpha, 1.0, phi, &opts)
                .unwrap()
                .cross_section;
            worst = worst.max((pw - closed).abs() / closed);
        }
    }
    let spot = theta_cross_section(PI, 1.0, PI).unwrap();
    let spot_err = (spot - 1.0 / TAU).abs();
    let budget = Duration::from_secs(60);
    Verdict {
        passed: worst <= 1e-3 && spot_err <= 1e-6 && start.elapsed() < budget,
        summary: format!("max relative deviation {worst:.3e}, spot value {spot:.7}"),
        budget: Some(budget),
    }
}

fn vacua() -> Verdict {
    let mut r = rng(10);
    let mut residual: f64 = 0.0;
    for m in [10, 100, 1000] {
        for theta in [0.0, 0.3, 1.0, PI, 5.5] {
            let v = build_theta_vacuum(theta, m).unwrap();
            residual = residual.max(eigenvalue_residual(&v).unwrap());
        }
    }
    let mut reindex: f64 = 0.0;
    for _ in 0..1000 {
        let n = r.gen_range(-100..=100);
        let theta = r.gen_range(-10.0..10.0);
        let phi = r.gen_range(0.0..TAU);
        let direct = Complex64::from_polar(1.0, (n + 1) as f64 * theta + phi * theta / TAU);
        let shifted = dyon_state_factor(n, theta, phi + TAU);
        reindex = reindex
            .max((shifted - dyon_state_factor(n + 1, theta, phi)).norm())
            .max((shifted - direct).norm());
    }
    verdict(
        residual < 1e-12 && reindex <= 1e-12,
        format!("eigen residual {residual:.3e}, reindexing {reindex:.3e} over 1000 samples"),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 vanishing phase", vanishing_phase),
        ("2 quantised theta phase", quantised_theta_phase),
        ("3 theta periodicity", theta_periodicity),
        ("4 duality invariance", duality_invariance),
        ("5 flux-rule triviality", flux_rule_triviality),
        ("6 loop integral", loop_integral),
        ("7 solver oracle", solver_oracle),
        ("8 fringe shift", fringe),
        ("9 scattering oracle", scattering_oracle),
        ("10 vacua", vacua),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let v = run();
        let secs = start.elapsed().as_secs_f64();
        let budget = v
            .budget
            .map(|b| format!(" / {}s", b.as_secs()))
            .unwrap_or_default();
        println!(
            "{} criterion {name}: {} [{secs:.1}s{budget}]",
            if v.passed { "PASS" } else { "FAIL" },
            v.summary
        );
        failed += (!v.passed) as usize;
    }
    if failed == 0 {
        println!("acceptance: all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
