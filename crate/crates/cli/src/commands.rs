use std::f64::consts::{PI, TAU};
use std::fs::File;
use std::path::PathBuf;
use std::sync::Arc;

use dyonlab_core::checks::{run_checks, CheckOptions, Provenance, SuiteSelection, DEFAULT_SAMPLES};
use dyonlab_core::dynamics::{
    build_link_phases, fringe_shift, plaquette_report, EvolveConfig, Evolver, Grid2D, SlitGeometry,
    TwoPathExperiment, TwoPathGeometry, WaveField,
};
use dyonlab_core::gauge::{beta_gradient, conjugate_momentum_field, winding_number};
use dyonlab_core::phase::{
    dyon_phase, dyon_phase_split, effective_alpha, heuristic_string_phase, ALGEBRA_TOL,
    COMPOSED_TOL, HEURISTIC_LABEL,
};
use dyonlab_core::scattering::{
    scan, theta_cross_section_with_cutoff, PartialWaveOptions, ScatteringSpec,
    DEFAULT_FORWARD_CUTOFF,
};
use dyonlab_core::units::{sz_check, sz_pairing, SzOutcome, SZ_TOLERANCE};
use dyonlab_core::vacua::{build_theta_vacuum_with, eigenvalue_residual, VacuumExport};
use dyonlab_core::{
    flux_from_integers, line_integral, witten_charges, DyonCharge, FluxTube, PhysicalConstants,
    PlanePath, PlanePoint,
};
use serde_json::json;

use crate::args::{ChargeArgs, Command, FluxArgs, ScatterArgs};
use crate::config::{ChargesBlock, FluxBlock, RunConfig};
use crate::report::{write_csv, Report};
use crate::CliError;

/// Shared state for one invocation.
pub struct Ctx {
    pub cfg: RunConfig,
    pub consts: PhysicalConstants,
    pub seed: u64,
    pub csv: Option<PathBuf>,
}

type Out = Result<Report, CliError>;

pub fn run(cmd: &Command, ctx: &Ctx) -> Out {
    match cmd {
        Command::Phase { charges, flux, n } => phase(ctx, charges, flux, *n),
        Command::Charges { charges, nq2, ng2 } => charges_cmd(ctx, charges, *nq2, *ng2),
        Command::Flux { flux, charges, n } => flux_cmd(ctx, flux, charges, *n),
        Command::LoopIntegral {
            charges,
            flux,
            path,
            open,
            field,
            step,
        } => loop_integral(
            ctx,
            charges,
            flux,
            path.clone(),
            *open,
            field.clone(),
            *step,
        ),
        Command::Vacuum {
            theta,
            m,
            normalized,
            state,
        } => vacuum(ctx, *theta, *m, *normalized, state.clone()),
        Command::Evolve { steps, alpha_eff } => evolve(ctx, *steps, *alpha_eff),
        Command::TwoPath {
            preset,
            alpha_eff,
            charges,
            flux,
        } => two_path(ctx, preset.clone(), *alpha_eff, charges, flux),
        Command::Fringe {
            l,
            d,
            w,
            lambda,
            delta0_bar,
            theta,
        } => fringe(ctx, [*l, *d, *w, *lambda, *delta0_bar], *theta),
        Command::Scatter(args) => scatter(ctx, args),
        Command::Check {
            suite,
            samples,
            full,
        } => check(ctx, suite.clone(), *samples, *full),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn merged_charges(args: &ChargeArgs, block: Option<&ChargesBlock>) -> ChargesBlock {
    let b = block.cloned().unwrap_or_default();
    ChargesBlock {
        n_q: args.nq.or(b.n_q),
        n_g: args.ng.or(b.n_g),
        theta: args.theta.or(b.theta),
        q: args.q.or(b.q),
        g: args.g.or(b.g),
    }
}

fn charges_from(
    b: &ChargesBlock,
    consts: &PhysicalConstants,
    what: &str,
) -> Result<Option<DyonCharge>, CliError> {
    let integers = b.n_q.is_some() || b.n_g.is_some();
    let raw = b.q.is_some() || b.g.is_some();
    match (integers, raw) {
        (true, true) => Err(usage(format!(
            "{what}: give either n_q/n_g or q/g, not both"
        ))),
        (true, false) => Ok(Some(witten_charges(
            b.n_q.unwrap_or(0),
            b.n_g.unwrap_or(0),
            b.theta.unwrap_or(0.0),
            consts,
        ))),
        (false, true) => {
            if b.theta.is_some() {
                return Err(usage(format!(
                    "{what}: theta applies to integer charges only"
                )));
            }
            Ok(Some(DyonCharge::new(
                b.q.unwrap_or(0.0),
                b.g.unwrap_or(0.0),
            )))
        }
        (false, false) => Ok(None),
    }
}

fn resolve_charges(ctx: &Ctx, args: &ChargeArgs) -> Result<Option<DyonCharge>, CliError> {
    charges_from(
        &merged_charges(args, ctx.cfg.charges.as_ref()),
        &ctx.consts,
        "charges",
    )
}

fn resolve_flux(
    ctx: &Ctx,
    args: &FluxArgs,
    charge_theta: Option<f64>,
) -> Result<Option<FluxTube>, CliError> {
    let b = ctx.cfg.fluxes.clone().unwrap_or_default();
    let b = FluxBlock {
        quanta: if args.flux_quanta {
            Some(true)
        } else {
            b.quanta
        },
        n_phi_e: args.n_phi_e.or(b.n_phi_e),
        n_phi_m: args.n_phi_m.or(b.n_phi_m),
        theta: args.flux_theta.or(b.theta),
        phi_m: args.phi_m.or(b.phi_m),
        phi_e: args.phi_e.or(b.phi_e),
        radius_eps: args.radius_eps.or(b.radius_eps),
    };
    let eps = b.radius_eps.unwrap_or(1.0);
    let quanta = b.quanta == Some(true);
    let integers = b.n_phi_e.is_some() || b.n_phi_m.is_some();
    let raw = b.phi_m.is_some() || b.phi_e.is_some();
    if [quanta, integers, raw].iter().filter(|x| **x).count() > 1 {
        return Err(usage(
            "fluxes: give one of flux quanta, n_phi_e/n_phi_m or phi_m/phi_e",
        ));
    }
    let f = if quanta {
        Some(FluxTube::flux_quanta(eps, &ctx.consts)?)
    } else if integers {
        let theta = b.theta.or(charge_theta).unwrap_or(0.0);
        Some(flux_from_integers(
            b.n_phi_e.unwrap_or(0),
            b.n_phi_m.unwrap_or(0),
            theta,
            eps,
            &ctx.consts,
        )?)
    } else if raw {
        Some(FluxTube::new(
            b.phi_m.unwrap_or(0.0),
            b.phi_e.unwrap_or(0.0),
            eps,
        )?)
    } else {
        None
    };
    Ok(f)
}

fn charge_theta(d: &DyonCharge) -> Option<f64> {
    d.quanta.map(|k| k.theta)
}

fn coupling_inputs(d: &DyonCharge, f: &FluxTube) -> serde_json::Value {
    json!({"charges": d, "fluxes": f})
}

fn phase(ctx: &Ctx, ca: &ChargeArgs, fa: &FluxArgs, n: Option<i64>) -> Out {
    let d = resolve_charges(ctx, ca)?
        .ok_or_else(|| usage("phase needs charges (--nq/--ng or --q/--g)"))?;
    let f = resolve_flux(ctx, fa, charge_theta(&d))?.ok_or_else(|| usage("phase needs fluxes"))?;
    let n = n.or(ctx.cfg.winding).unwrap_or(1);
    let mut inputs = coupling_inputs(&d, &f);
    inputs["winding"] = json!(n);
    inputs["alpha"] = json!(ctx.consts.alpha);
    let mut r = Report::new("phase", ctx.seed, inputs);
    let p = dyon_phase(&d, &f, n);
    r.result("phase", p.value, Some(ALGEBRA_TOL), Provenance::Analytic);
    r.result(
        "phase_reduced",
        p.reduced,
        Some(ALGEBRA_TOL),
        Provenance::Analytic,
    );
    r.result(
        "alpha_eff",
        effective_alpha(&d, &f),
        Some(ALGEBRA_TOL),
        Provenance::Analytic,
    );
    if let Some(k) = d.quanta {
        let split = dyon_phase_split(k.n_q, k.n_g, k.theta, &f, n, &ctx.consts);
        r.result(
            "standard_part",
            split.standard.value,
            Some(ALGEBRA_TOL),
            Provenance::Analytic,
        );
        r.result(
            "theta_part",
            split.theta_part.value,
            Some(ALGEBRA_TOL),
            Provenance::Analytic,
        );
        r.check(
            "split_recombines",
            (split.total().value - p.value).abs(),
            COMPOSED_TOL,
            Provenance::Analytic,
            String::new(),
        );
        if let Some(fq) = f.quanta {
            if fq.theta == k.theta {
                let big_n = n * (k.n_q * fq.n_phi_m - k.n_g * fq.n_phi_e);
                r.result("flux_rule_n", big_n, None, Provenance::Analytic);
                r.check(
                    "flux_rule_whole_turns",
                    (p.value - TAU * big_n as f64).abs(),
                    COMPOSED_TOL,
                    Provenance::Analytic,
                    format!("expected 2 pi x {big_n}"),
                );
            }
        }
    }
    Ok(r)
}

fn charges_cmd(ctx: &Ctx, ca: &ChargeArgs, nq2: Option<i64>, ng2: Option<i64>) -> Out {
    let d = resolve_charges(ctx, ca)?.ok_or_else(|| usage("charges needs --nq/--ng or --q/--g"))?;
    let mut partner = ctx.cfg.partner.clone().unwrap_or_default();
    partner.n_q = nq2.or(partner.n_q);
    partner.n_g = ng2.or(partner.n_g);
    if partner.theta.is_none() && (partner.n_q.is_some() || partner.n_g.is_some()) {
        partner.theta = charge_theta(&d);
    }
    let d2 = charges_from(&partner, &ctx.consts, "partner")?;
    let mut r = Report::new(
        "charges",
        ctx.seed,
        json!({"charges": d, "partner": d2, "alpha": ctx.consts.alpha}),
    );
    r.result("q", d.q, Some(ALGEBRA_TOL), Provenance::Analytic);
    r.result("g", d.g, Some(ALGEBRA_TOL), Provenance::Analytic);
    if let Some(d2) = d2 {
        let pairing = sz_pairing(&d, &d2);
        r.result(
            "sz_pairing",
            pairing,
            Some(SZ_TOLERANCE),
            Provenance::Analytic,
        );
        let outcome = sz_check(&d, &d2);
        r.data("sz_outcome", outcome);
        let gap = match outcome {
            SzOutcome::Quantised { n } => (pairing - n as f64 / 2.0).abs(),
            SzOutcome::Violation { pairing, nearest_n } => (pairing - nearest_n as f64 / 2.0).abs(),
        };
        r.check(
            "sz_quantised",
            gap,
            SZ_TOLERANCE,
            Provenance::Analytic,
            format!("{outcome:?}"),
        );
        let (string_phase, string_outcome) = heuristic_string_phase(&d, &d2);
        r.result(
            "string_phase",
            string_phase.value,
            Some(COMPOSED_TOL),
            Provenance::Analytic,
        );
        r.data("string_phase_outcome", string_outcome);
        r.data("string_phase_label", HEURISTIC_LABEL);
    }
    Ok(r)
}

fn flux_cmd(ctx: &Ctx, fa: &FluxArgs, ca: &ChargeArgs, n: Option<i64>) -> Out {
    let d = resolve_charges(ctx, ca)?;
    let f = resolve_flux(ctx, fa, d.as_ref().and_then(charge_theta))?
        .ok_or_else(|| usage("flux needs --flux-quanta, --n-phi-e/--n-phi-m or --phi-m/--phi-e"))?;
    let n = n.or(ctx.cfg.winding).unwrap_or(1);
    let mut r = Report::new(
        "flux",
        ctx.seed,
        json!({"fluxes": f, "charges": d, "winding": n, "alpha": ctx.consts.alpha}),
    );
    r.result("phi_m", f.phi_m, Some(ALGEBRA_TOL), Provenance::Analytic);
    r.result("phi_e", f.phi_e, Some(ALGEBRA_TOL), Provenance::Analytic);
    if let Some(d) = d {
        let p = dyon_phase(&d, &f, n);
        r.result("phase", p.value, Some(ALGEBRA_TOL), Provenance::Analytic);
        if let (Some(k), Some(fq)) = (d.quanta, f.quanta) {
            if k.theta == fq.theta {
                let big_n = n * (k.n_q * fq.n_phi_m - k.n_g * fq.n_phi_e);
                r.result("flux_rule_n", big_n, None, Provenance::Analytic);
                r.check(
                    "flux_rule_whole_turns",
                    (p.value - TAU * big_n as f64).abs(),
                    COMPOSED_TOL,
                    Provenance::Analytic,
                    format!("expected 2 pi x {big_n}"),
                );
            }
        }
    }
    Ok(r)
}

#[allow(clippy::too_many_arguments)]
fn loop_integral(
    ctx: &Ctx,
    ca: &ChargeArgs,
    fa: &FluxArgs,
    path_file: Option<PathBuf>,
    open: bool,
    field: Option<String>,
    step: Option<f64>,
) -> Out {
    let block = ctx.cfg.path.clone().unwrap_or_default();
    let closed = if open {
        false
    } else {
        block.closed.unwrap_or(true)
    };
    let path = match (path_file.or(block.csv), block.points) {
        (Some(file), _) => {
            let reader =
                File::open(&file).map_err(|e| usage(format!("{}: {e}", file.display())))?;
            PlanePath::from_csv(reader, closed)?
        }
        (None, Some(points)) => {
            let pts: Vec<PlanePoint> = points.iter().map(|p| PlanePoint::new(p[0], p[1])).collect();
            if closed {
                PlanePath::closed(pts)?
            } else {
                PlanePath::open(pts)?
            }
        }
        (None, None) => return Err(usage("loop-integral needs --path FILE or a path block")),
    };
    let merged = merged_charges(ca, ctx.cfg.charges.as_ref());
    let d = charges_from(&merged, &ctx.consts, "charges")?;
    let f = resolve_flux(ctx, fa, merged.theta)?;
    let field = field
        .or(block.field)
        .unwrap_or_else(|| if f.is_some() { "dyon" } else { "beta" }.to_string());
    let step = step.or(block.step).unwrap_or_else(|| path.default_step());
    let winding = if closed {
        Some(winding_number(&path)?)
    } else {
        None
    };
    let (integral, strength, inputs) = match field.as_str() {
        "beta" => {
            let theta = merged
                .theta
                .ok_or_else(|| usage("the beta field needs --theta"))?;
            let v = line_integral(|p| Ok(beta_gradient(theta, p)), &path, step)?;
            (v, theta, json!({"field": "beta", "theta": theta}))
        }
        "dyon" => {
            let d = d.ok_or_else(|| usage("the dyon field needs charges"))?;
            let f = f.ok_or_else(|| usage("the dyon field needs fluxes"))?;
            let v = line_integral(|p| conjugate_momentum_field(&d, &f, p), &path, step)?;
            (
                v,
                d.q * f.phi_m - d.g * f.phi_e,
                json!({"field": "dyon", "charges": d, "fluxes": f}),
            )
        }
        other => {
            return Err(usage(format!(
                "unknown field '{other}', expected beta or dyon"
            )))
        }
    };
    let mut inputs = inputs;
    inputs["closed"] = json!(closed);
    inputs["points"] = json!(path.points().len());
    inputs["step"] = json!(step);
    let mut r = Report::new("loop-integral", ctx.seed, inputs);
    r.result("integral", integral, Some(1e-8), Provenance::Oracle);
    if let Some(w) = winding {
        let expected = w as f64 * strength;
        r.result("winding", w, None, Provenance::Analytic);
        r.result(
            "expected",
            expected,
            Some(ALGEBRA_TOL),
            Provenance::Analytic,
        );
        r.check(
            "integral_counts_windings",
            (integral - expected).abs(),
            1e-8,
            Provenance::Oracle,
            String::new(),
        );
    }
    Ok(r)
}

fn vacuum(
    ctx: &Ctx,
    theta: Option<f64>,
    m: Option<i64>,
    normalized: bool,
    state: Option<PathBuf>,
) -> Out {
    let b = ctx.cfg.vacuum.clone().unwrap_or_default();
    let theta = theta.or(b.theta).unwrap_or(0.0);
    let m = m.or(b.m).unwrap_or(100);
    let normalized = normalized || b.normalized.unwrap_or(false);
    let v = build_theta_vacuum_with(theta, m, normalized)?;
    let mut r = Report::new(
        "vacuum",
        ctx.seed,
        json!({"theta": theta, "m": m, "normalized": normalized}),
    );
    let residual = eigenvalue_residual(&v)?;
    r.result(
        "eigen_residual",
        residual,
        Some(1e-12),
        Provenance::Analytic,
    );
    r.result(
        "norm_sqr",
        v.state().norm_sqr(),
        Some(ALGEBRA_TOL),
        Provenance::Analytic,
    );
    r.check(
        "shift_eigenvalue",
        residual,
        1e-12,
        Provenance::Analytic,
        String::new(),
    );
    if let Some(p) = &ctx.csv {
        let rows = v
            .state()
            .entries()
            .into_iter()
            .map(|(n, re, im)| [n as f64, re, im]);
        write_csv(p, ["n", "re", "im"], rows)?;
    }
    if let Some(p) = state {
        let text = serde_json::to_string(&VacuumExport::new(&v, normalized)).expect("plain data");
        std::fs::write(&p, text + "\n")?;
    }
    Ok(r)
}

/// Charges giving a pure magnetic coupling `alpha_eff` to the tube.
fn magnetic_coupling(alpha_eff: f64, radius_eps: f64) -> Result<(DyonCharge, FluxTube), CliError> {
    Ok((
        DyonCharge::new(1.0, 0.0),
        FluxTube::new(TAU * alpha_eff, 0.0, radius_eps)?,
    ))
}

fn evolve(ctx: &Ctx, steps: Option<usize>, alpha_eff: Option<f64>) -> Out {
    let b = ctx
        .cfg
        .evolution
        .clone()
        .ok_or_else(|| usage("evolve needs a config file with an evolution block"))?;
    let steps = steps.unwrap_or(b.steps);
    let (d, f) = match alpha_eff.or(b.alpha_eff) {
        Some(a) => magnetic_coupling(a, b.radius_eps)?,
        None => {
            let d = resolve_charges(ctx, &ChargeArgs::default())?;
            let f = resolve_flux(ctx, &FluxArgs::default(), d.as_ref().and_then(charge_theta))?;
            match (d, f) {
                (Some(d), Some(f)) => (d, f.with_radius(b.radius_eps)?),
                _ => magnetic_coupling(0.0, b.radius_eps)?,
            }
        }
    };
    let grid = Arc::new(Grid2D::centered(b.n, b.dx, b.radius_eps)?);
    let links = build_link_phases(&grid, &d, &f)?;
    let alpha = effective_alpha(&d, &f);
    let plaquettes = plaquette_report(&grid, &links, alpha);
    let cfg = EvolveConfig {
        mass: b.mass,
        dt: b.dt,
        steps,
        absorb_margin: b.absorb_margin,
        links,
        potential: None,
    };
    let mut psi = WaveField::gaussian(grid.clone(), &b.packet)?;
    let stats = Evolver::new(grid, &cfg)?.run(&mut psi)?;
    let (mean, var) = psi.moments();
    let mut inputs = serde_json::to_value(&b).expect("plain data");
    inputs["steps"] = json!(steps);
    inputs["alpha_eff"] = json!(alpha);
    let mut r = Report::new("evolve", ctx.seed, inputs);
    r.result("final_norm", stats.final_norm, None, Provenance::Oracle);
    r.result(
        "max_step_drift",
        stats.max_step_drift,
        Some(1e-10),
        Provenance::Oracle,
    );
    r.result("mean_position", mean, None, Provenance::Oracle);
    r.result("variance", var, None, Provenance::Oracle);
    r.check(
        "unitary_steps",
        stats.max_step_drift,
        1e-10,
        Provenance::Oracle,
        String::new(),
    );
    r.check(
        "plaquettes",
        plaquettes
            .max_exterior_deviation
            .max(plaquettes.tube_deviation),
        1e-10,
        Provenance::Analytic,
        String::new(),
    );
    if let Some(p) = &ctx.csv {
        write_csv(
            p,
            ["x", "y", "re", "im"],
            psi.rows().map(|(x, y, re, im)| [x, y, re, im]),
        )?;
    }
    Ok(r)
}

fn two_path(
    ctx: &Ctx,
    preset: Option<String>,
    alpha_eff: Option<f64>,
    ca: &ChargeArgs,
    fa: &FluxArgs,
) -> Out {
    let block = ctx.cfg.two_path.clone();
    let geometry = match (block.as_ref().and_then(|b| b.geometry), preset.is_some()) {
        (Some(g), false) => g,
        _ => {
            let name = preset
                .or_else(|| block.as_ref().and_then(|b| b.preset.clone()))
                .unwrap_or_else(|| "reference".into());
            match name.as_str() {
                "reference" => TwoPathGeometry::reference(),
                "quick" => TwoPathGeometry::quick(),
                other => {
                    return Err(usage(format!(
                        "unknown preset '{other}', expected reference or quick"
                    )))
                }
            }
        }
    };
    let (d, f) = match alpha_eff.or(block.as_ref().and_then(|b| b.alpha_eff)) {
        Some(a) => magnetic_coupling(a, geometry.radius_eps)?,
        None => {
            let d = resolve_charges(ctx, ca)?
                .ok_or_else(|| usage("two-path needs --alpha-eff or charges and fluxes"))?;
            let f = resolve_flux(ctx, fa, charge_theta(&d))?
                .ok_or_else(|| usage("two-path needs --alpha-eff or charges and fluxes"))?;
            (d, f.with_radius(geometry.radius_eps)?)
        }
    };
    let res = TwoPathExperiment::new(geometry)?.measure(&d, &f)?;
    let mut inputs = json!({"geometry": geometry});
    inputs["coupling"] = coupling_inputs(&d, &f);
    let mut r = Report::new("two-path", ctx.seed, inputs);
    r.result(
        "alpha_eff",
        res.alpha_eff,
        Some(ALGEBRA_TOL),
        Provenance::Analytic,
    );
    r.result(
        "expected_phase",
        res.expected_phase,
        Some(ALGEBRA_TOL),
        Provenance::Analytic,
    );
    r.result(
        "measured_phase",
        res.measured_phase,
        Some(1e-2),
        Provenance::Oracle,
    );
    r.result(
        "fringe_phase",
        res.fringe_phase,
        Some(1e-2),
        Provenance::Oracle,
    );
    r.result("visibility", res.visibility, None, Provenance::Oracle);
    r.result(
        "max_guard_probability",
        res.max_guard_probability,
        Some(1e-6),
        Provenance::Oracle,
    );
    r.result("steps", res.steps, None, Provenance::Analytic);
    r.check(
        "overlap_phase",
        res.error,
        1e-2,
        Provenance::Oracle,
        String::new(),
    );
    r.check(
        "estimator_agreement",
        res.estimator_gap,
        1e-2,
        Provenance::Oracle,
        String::new(),
    );
    r.check(
        "plaquettes",
        res.plaquettes
            .max_exterior_deviation
            .max(res.plaquettes.tube_deviation),
        1e-10,
        Provenance::Analytic,
        String::new(),
    );
    if let Some(p) = &ctx.csv {
        write_csv(
            p,
            ["y", "intensity"],
            res.profile.iter().map(|&(y, i)| [y, i]),
        )?;
    }
    Ok(r)
}

fn fringe(ctx: &Ctx, flags: [Option<f64>; 5], theta: Option<f64>) -> Out {
    let base = ctx.cfg.slits.unwrap_or(SlitGeometry {
        l: 1000.0,
        d: 10.0,
        w: 1.0,
        lambda: 1.0,
        delta0_bar: 0.0,
    });
    let [l, d, w, lambda, delta0_bar] = flags;
    let g = SlitGeometry {
        l: l.unwrap_or(base.l),
        d: d.unwrap_or(base.d),
        w: w.unwrap_or(base.w),
        lambda: lambda.unwrap_or(base.lambda),
        delta0_bar: delta0_bar.unwrap_or(base.delta0_bar),
    };
    let theta = theta.unwrap_or(0.0);
    let res = fringe_shift(&g, theta)?;
    let mut r = Report::new("fringe", ctx.seed, json!({"slits": g, "theta": theta}));
    let tol = 0.02 * res.period;
    r.result("delta_x", res.delta_x, Some(tol), Provenance::Oracle);
    r.result(
        "predicted",
        res.predicted,
        Some(ALGEBRA_TOL),
        Provenance::Analytic,
    );
    r.result(
        "period",
        res.period,
        Some(ALGEBRA_TOL),
        Provenance::Analytic,
    );
    r.check(
        "shift_formula",
        (res.delta_x - res.predicted).abs(),
        tol,
        Provenance::Oracle,
        String::new(),
    );
    if let Some(p) = &ctx.csv {
        write_csv(
            p,
            ["x", "intensity"],
            res.pattern.iter().map(|&(x, i)| [x, i]),
        )?;
    }
    Ok(r)
}

fn scatter(ctx: &Ctx, a: &ScatterArgs) -> Out {
    let b = ctx.cfg.scattering.clone().unwrap_or_default();
    let theta = a.theta.or(b.theta);
    let alpha = a.alpha_eff.or(b.alpha_eff);
    let alpha = match (theta, alpha) {
        (Some(_), Some(_)) => return Err(usage("give either theta or alpha_eff, not both")),
        (Some(t), None) => t / TAU,
        (None, Some(x)) => x,
        (None, None) => return Err(usage("scatter needs --theta or --alpha-eff")),
    };
    let k = a.k.or(b.k).unwrap_or(1.0);
    let angles = if !a.phi.is_empty() {
        a.phi.clone()
    } else if let (Some(lo), Some(hi)) = (a.phi_min, a.phi_max) {
        let n = a.points.unwrap_or(50).max(2);
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    } else {
        b.angles.clone().unwrap_or_else(|| vec![PI])
    };
    let cutoff = a
        .forward_cutoff
        .or(b.forward_cutoff)
        .unwrap_or(DEFAULT_FORWARD_CUTOFF);
    let spec = ScatteringSpec {
        alpha_eff: alpha,
        k,
        angles,
        forward_cutoff: cutoff,
    };
    spec.validate()?;
    let defaults = PartialWaveOptions::default();
    let opts = PartialWaveOptions {
        m_max: a.m_max.or(b.m_max).unwrap_or(defaults.m_max),
        summation: a.summation.or(b.summation).unwrap_or(defaults.summation),
        forward_cutoff: cutoff,
        ..defaults
    };
    let partial = !a.no_partial_waves && b.partial_waves.unwrap_or(true);
    let mut inputs =
        json!({"alpha_eff": alpha, "k": k, "angles": spec.angles, "forward_cutoff": cutoff});
    if let Some(t) = theta {
        inputs["theta"] = json!(t);
    }
    if partial {
        inputs["partial_waves"] = serde_json::to_value(opts).expect("plain data");
    }
    let mut r = Report::new("scatter", ctx.seed, inputs);
    let rows: Vec<[f64; 4]> = if partial {
        scan(&spec, &opts)?
            .into_iter()
            .map(|row| [row.phi, row.closed_form, row.partial_wave, row.rel_error])
            .collect()
    } else {
        spec.angles
            .iter()
            .map(|&phi| {
                let v = theta_cross_section_with_cutoff(TAU * alpha, k, phi, cutoff)?;
                Ok([phi, v, f64::NAN, f64::NAN])
            })
            .collect::<Result<_, CliError>>()?
    };
    if let [row] = rows.as_slice() {
        r.result(
            "cross_section",
            row[1],
            Some(ALGEBRA_TOL),
            Provenance::Analytic,
        );
        if partial {
            r.result("partial_wave", row[2], Some(1e-3), Provenance::Oracle);
        }
    } else {
        let table: Vec<_> = rows
            .iter()
            .map(|x| json!({"phi": x[0], "closed_form": x[1], "partial_wave": x[2], "rel_error": x[3]}))
            .collect();
        r.data("rows", table);
    }
    if partial {
        let worst = rows.iter().map(|x| x[3]).fold(0.0, f64::max);
        r.check(
            "partial_wave_oracle",
            worst,
            1e-3,
            Provenance::Oracle,
            String::new(),
        );
    }
    if let Some(p) = &ctx.csv {
        write_csv(p, ["phi", "closed_form", "partial_wave", "rel_error"], rows)?;
    }
    Ok(r)
}

fn check(ctx: &Ctx, suite: Option<String>, samples: Option<usize>, full: bool) -> Out {
    let b = ctx.cfg.check.clone().unwrap_or_default();
    let name = suite.or(b.suite).unwrap_or_else(|| "all".into());
    let selection: SuiteSelection = name
        .parse()
        .map_err(|e: dyonlab_core::Error| usage(e.to_string()))?;
    let opts = CheckOptions {
        seed: ctx.seed,
        samples: samples.or(b.samples).unwrap_or(DEFAULT_SAMPLES),
        full: full || b.full.unwrap_or(false),
    };
    let outcomes = run_checks(selection, &opts);
    let mut r = Report::new(
        "check",
        ctx.seed,
        json!({"suite": name, "samples": opts.samples, "full": opts.full}),
    );
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    r.result("checks_run", outcomes.len(), None, Provenance::Property);
    r.result("checks_failed", failed, None, Provenance::Property);
    for o in &outcomes {
        r.outcome(o);
    }
    Ok(r)
}
