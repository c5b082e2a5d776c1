use std::fmt::Write as _;
use std::path::Path;

use nullcharge::catalog::FieldError;
use nullcharge::conformal::{
    conformal_jacobian, eom_invariance_residual, field_round_trip, well_conditioned, ConformalParams,
};
use nullcharge::eigen::{
    admissible_velocities, capture_surface_test, propagate, velocity_map, EigenVelocity, ParticleState,
    PropagateError,
};
use nullcharge::minkowski::{em_invariants, em_tensor_from_eb, FieldEB, FourVector, Mat4, Vec3};
use nullcharge::radiation::{cutoff_factors, radiated_flux, CutoffFactors, RadiationError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ConformalConfig, EigenConfig, FluxConfig, MapConfig, PropagateConfig};
use crate::format::{g17, to_json};
use crate::{CliError, Output};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Serialize)]
struct Invariants {
    #[serde(rename = "B2_minus_E2")]
    b2_minus_e2: f64,
    #[serde(rename = "E_dot_B")]
    e_dot_b: f64,
}

#[derive(Serialize)]
struct Branch {
    branch: &'static str,
    edot: f64,
    v: Vec3,
}

#[derive(Serialize)]
#[serde(untagged)]
enum Velocities {
    Listed(Vec<Branch>),
    Unconstrained(&'static str),
}

#[derive(Serialize)]
struct EigenReport {
    q: f64,
    #[serde(rename = "E")]
    e: Vec3,
    #[serde(rename = "B")]
    b: Vec3,
    class: &'static str,
    capture: bool,
    invariants: Invariants,
    /// `[edot, multiplicity]` pairs.
    roots: Vec<(f64, u32)>,
    velocities: Velocities,
}

pub fn eigen(cfg: &EigenConfig) -> Result<Output, CliError> {
    let f = cfg.validate()?;
    let sol = admissible_velocities(cfg.q, f, cfg.deg_tol);
    let (b2_minus_e2, e_dot_b) = em_invariants(f);
    let velocities = if sol.unconstrained {
        Velocities::Unconstrained("unconstrained")
    } else {
        let names = ["+", "-"];
        Velocities::Listed(
            sol.velocities.iter().zip(names).map(|(ev, branch)| Branch { branch, edot: ev.edot, v: ev.v }).collect(),
        )
    };
    let report = EigenReport {
        q: cfg.q,
        e: f.e,
        b: f.b,
        class: sol.class.as_str(),
        capture: capture_surface_test(f, cfg.deg_tol),
        invariants: Invariants { b2_minus_e2, e_dot_b },
        roots: sol.roots.iter().map(|r| (r.edot, r.multiplicity)).collect(),
        velocities,
    };
    let summary = format!("class {}, {} root(s)", report.class, report.roots.len());
    Ok(Output::ok(to_json(&report), summary))
}

#[derive(Serialize)]
struct SweepEntry {
    epsilon: f64,
    #[serde(rename = "I0")]
    i0: f64,
    #[serde(rename = "I0_eps4")]
    i0_eps4: f64,
    /// `I0` at the previous sweep entry divided by this one's.
    ratio_to_previous: Option<f64>,
}

#[derive(Serialize)]
struct FluxReport {
    q: f64,
    epsilon: f64,
    t: f64,
    window: (f64, f64),
    factors: CutoffFactors,
    #[serde(rename = "I0_eps4")]
    i0_eps4: f64,
    p_em: FourVector,
    #[serde(rename = "M_em")]
    m_em: Mat4,
    sweep: Vec<SweepEntry>,
}

fn radiation_error(e: RadiationError) -> CliError {
    match e {
        RadiationError::Quadrature(_) | RadiationError::Retarded(_) => CliError::Quadrature(e.to_string()),
        _ => CliError::Input(e.to_string()),
    }
}

pub fn flux(cfg: &FluxConfig, base: &Path, eps: Option<f64>) -> Result<Output, CliError> {
    let plan = cfg.validate(base, eps)?;
    let res = radiated_flux(plan.q, plan.worldline.as_ref(), plan.t, plan.epsilon, plan.quad_tol)
        .map_err(radiation_error)?;
    let mut sweep = Vec::with_capacity(plan.eps_sweep.len());
    let mut prev: Option<f64> = None;
    for &e in &plan.eps_sweep {
        let f = cutoff_factors(e).map_err(radiation_error)?;
        sweep.push(SweepEntry { epsilon: e, i0: f.i0, i0_eps4: f.i0 * e.powi(4), ratio_to_previous: prev.map(|p| f.i0 / p) });
        prev = Some(f.i0);
    }
    let report = FluxReport {
        q: plan.q,
        epsilon: plan.epsilon,
        t: plan.t,
        window: (plan.worldline.domain().0, plan.t),
        factors: res.factors,
        i0_eps4: res.factors.i0 * plan.epsilon.powi(4),
        p_em: res.p_em,
        m_em: res.m_em,
        sweep,
    };
    let summary = format!("p0 = {} at epsilon = {}", g17(res.p_em.t), g17(plan.epsilon));
    Ok(Output::ok(to_json(&report), summary))
}

pub const TRAJECTORY_HEADER: &str = "t,zx,zy,zz,e,px,py,pz";

fn trajectory_csv(states: &[ParticleState]) -> String {
    let mut out = String::with_capacity(64 * (states.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for s in states {
        let p = s.p();
        let cells = [s.z.t, s.z.x, s.z.y, s.z.z, s.e, p.x, p.y, p.z].map(g17);
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn propagate_cmd(cfg: &PropagateConfig) -> Result<Output, CliError> {
    let field = cfg.validate()?;
    let init = &cfg.initial;
    let s0 = ParticleState { z: init.z, v: init.v, e: init.e };
    match propagate(cfg.q, s0, &field, cfg.t_end, cfg.dt, cfg.admissibility_tol) {
        Ok(states) => {
            let last = states.last().expect("at least the initial state");
            let summary = format!("{} states, final e = {}", states.len(), g17(last.e));
            Ok(Output::ok(trajectory_csv(&states), summary))
        }
        Err(PropagateError::InvalidInput(m)) => Err(CliError::Input(m)),
        Err(e @ PropagateError::InadmissibleInitialState { .. }) => Err(CliError::Inadmissible(e.to_string())),
        Err(PropagateError::Field(e)) => Err(CliError::Input(e.to_string())),
        Err(PropagateError::RadiationDivergence { t, residual, partial }) => {
            let mut body = trajectory_csv(&partial);
            let _ = writeln!(body, "# error,RadiationDivergence,t={},residual={}", g17(t), g17(residual));
            let msg = format!("velocity no longer admissible at t = {} (residual {})", g17(t), g17(residual));
            Ok(Output { body, summary: msg.clone(), failure: Some(CliError::Divergence(msg)) })
        }
        Err(PropagateError::MultiplierVanished { t, partial }) => {
            let mut body = trajectory_csv(&partial);
            let _ = writeln!(body, "# error,MultiplierVanished,t={}", g17(t));
            let msg = format!("multiplier vanished near t = {}", g17(t));
            Ok(Output { body, summary: msg.clone(), failure: Some(CliError::Divergence(msg)) })
        }
    }
}

pub const MAP_HEADER: &str =
    "x,y,z,Ex,Ey,Ez,Bx,By,Bz,class,capture,edot_plus,vpx,vpy,vpz,edot_minus,vmx,vmy,vmz";

fn branch_cells(ev: Option<EigenVelocity>) -> [String; 4] {
    match ev {
        Some(ev) => [ev.edot, ev.v.x, ev.v.y, ev.v.z].map(g17),
        None => Default::default(),
    }
}

pub fn map(cfg: &MapConfig) -> Result<Output, CliError> {
    let field = cfg.validate()?;
    let grid = cfg.grid.points();
    let records = velocity_map(&field, &grid, cfg.t, cfg.q, cfg.deg_tol).map_err(|e: FieldError| {
        CliError::Input(format!("{e}; exclude the core from the grid or lower r_core"))
    })?;
    let mut out = String::with_capacity(200 * (records.len() + 1));
    out.push_str(MAP_HEADER);
    out.push('\n');
    let mut captured = 0;
    for r in &records {
        let (p, f) = (r.point, r.field);
        let mut cells: Vec<String> = [p.x, p.y, p.z, f.e.x, f.e.y, f.e.z, f.b.x, f.b.y, f.b.z].map(g17).to_vec();
        cells.push(r.class.as_str().to_owned());
        cells.push(r.capture.to_string());
        cells.extend(branch_cells(r.plus));
        cells.extend(branch_cells(r.minus));
        out.push_str(&cells.join(","));
        out.push('\n');
        captured += r.capture as usize;
    }
    let summary = format!("{} grid points, {captured} on the capture surface", records.len());
    Ok(Output::ok(out, summary))
}

#[derive(Serialize, Default)]
struct Residuals {
    omega_identity: f64,
    field_round_trip: f64,
    eom_invariance: f64,
    dilatation_only: f64,
    identity: f64,
}

#[derive(Serialize)]
struct ConformalReport {
    seed: u64,
    samples: usize,
    rejected_near_singular: usize,
    max_residuals: Residuals,
    thresholds: crate::config::ConformalTolerances,
    pass: bool,
}

fn uniform4(rng: &mut ChaCha8Rng, s: f64) -> FourVector {
    FourVector::new(rng.gen_range(-s..=s), rng.gen_range(-s..=s), rng.gen_range(-s..=s), rng.gen_range(-s..=s))
}

fn uniform3(rng: &mut ChaCha8Rng, s: f64) -> Vec3 {
    Vec3::new(rng.gen_range(-s..=s), rng.gen_range(-s..=s), rng.gen_range(-s..=s))
}

pub fn conformal_check(cfg: &ConformalConfig, seed: Option<u64>) -> Result<Output, CliError> {
    cfg.validate()?;
    let seed = seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut res = Residuals::default();
    let mut rejected = 0;
    let mut accepted = 0;
    let fail = |e: nullcharge::conformal::ConformalError| CliError::Property(e.to_string());
    while accepted < cfg.samples {
        let x = uniform4(&mut rng, cfg.x_range);
        let b = uniform4(&mut rng, cfg.b_max);
        let f = FieldEB { e: uniform3(&mut rng, cfg.field_range), b: uniform3(&mut rng, cfg.field_range) };
        let theta = rng.gen_range(-cfg.theta_max..=cfg.theta_max);
        if !well_conditioned(x, b) {
            rejected += 1;
            if rejected > 1000 * cfg.samples {
                return Err(CliError::Input("sampling region is almost entirely singular".into()));
            }
            continue;
        }
        accepted += 1;
        let j = conformal_jacobian(x, b).map_err(fail)?;
        res.omega_identity = res.omega_identity.max(j.metric_defect());
        res.field_round_trip = res.field_round_trip.max(field_round_trip(&em_tensor_from_eb(f), x, b).map_err(fail)?);
        let full = eom_invariance_residual(cfg.q, f, x, ConformalParams { theta_dil: theta, b }).map_err(fail)?;
        res.eom_invariance = res.eom_invariance.max(full);
        let dil = eom_invariance_residual(cfg.q, f, x, ConformalParams::dilatation(theta)).map_err(fail)?;
        res.dilatation_only = res.dilatation_only.max(dil);
        let id = eom_invariance_residual(cfg.q, f, x, ConformalParams::dilatation(0.0)).map_err(fail)?;
        res.identity = res.identity.max(id);
    }
    let t = cfg.tolerances;
    let pass = res.omega_identity <= t.omega_identity
        && res.field_round_trip <= t.field_round_trip
        && res.eom_invariance <= t.eom_invariance
        && res.dilatation_only <= t.dilatation_only
        && res.identity == 0.0;
    let summary = format!(
        "{} samples, max invariance residual {}: {}",
        accepted,
        g17(res.eom_invariance),
        if pass { "pass" } else { "FAIL" }
    );
    let report = ConformalReport {
        seed,
        samples: accepted,
        rejected_near_singular: rejected,
        max_residuals: res,
        thresholds: t,
        pass,
    };
    let body = to_json(&report);
    let failure = (!pass).then(|| CliError::Property(summary.clone()));
    Ok(Output { body, summary, failure })
}
