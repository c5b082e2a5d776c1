//! Admissible motion of a massless charge in an external field.
//!
//! A photon-like charge with null velocity `(1, v)` can move through a field
//! only if `(1, v)` is an eigenvector of the field tensor:
//! `edot (1, v) = q F (1, v)`, i.e. `edot = q E.v` and
//! `edot v = q (E + v x B)`. The eigenvalues solve
//! `edot^4 + edot^2 q^2 (B^2 - E^2) - q^4 (E.B)^2 = 0`.
//!
//! Degenerate fields (`E.B = 0` or `|E| = |B|`) are classified first and
//! handled with their dedicated closed forms, since the generic eigenvector
//! formula depends on `sgn(E.B)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{ExternalField, FieldError};
use crate::minkowski::{FieldEB, FourVector, Vec3};

/// Default degeneracy tolerance, relative to the field scale `E^2 + B^2`.
pub const DEFAULT_DEG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldClass {
    ZeroField,
    NullField,
    PureE,
    PureB,
    OrthogonalSubMagnetic,
    OrthogonalSuperElectric,
    Generic,
}

impl FieldClass {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldClass::ZeroField => "ZeroField",
            FieldClass::NullField => "NullField",
            FieldClass::PureE => "PureE",
            FieldClass::PureB => "PureB",
            FieldClass::OrthogonalSubMagnetic => "OrthogonalSubMagnetic",
            FieldClass::OrthogonalSuperElectric => "OrthogonalSuperElectric",
            FieldClass::Generic => "Generic",
        }
    }
}

impl std::fmt::Display for FieldClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A real root of the eigenvalue quartic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenRoot {
    pub edot: f64,
    pub multiplicity: u32,
}

/// An admissible direction of motion and its eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenVelocity {
    pub edot: f64,
    pub v: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenSolution {
    pub class: FieldClass,
    pub roots: Vec<EigenRoot>,
    /// Admissible velocities, `+` branch first.
    pub velocities: Vec<EigenVelocity>,
    /// Set when every direction is admissible (no field, or no charge).
    pub unconstrained: bool,
}

struct Invariants {
    e2: f64,
    b2: f64,
    eb: f64,
    scale: f64,
}

impl Invariants {
    fn of(f: &FieldEB) -> Self {
        let (e2, b2) = (f.e.norm_sqr(), f.b.norm_sqr());
        Invariants { e2, b2, eb: f.e.dot(f.b), scale: e2 + b2 }
    }
}

pub fn classify_field(f: FieldEB, deg_tol: f64) -> FieldClass {
    let inv = Invariants::of(&f);
    let s = inv.scale;
    if s < deg_tol * deg_tol {
        return FieldClass::ZeroField;
    }
    let thresh = deg_tol * s;
    if inv.eb.abs() >= thresh {
        return FieldClass::Generic;
    }
    let d = inv.b2 - inv.e2;
    if d.abs() < thresh {
        FieldClass::NullField
    } else if inv.e2 < thresh {
        FieldClass::PureB
    } else if inv.b2 < thresh {
        FieldClass::PureE
    } else if d > 0.0 {
        FieldClass::OrthogonalSubMagnetic
    } else {
        FieldClass::OrthogonalSuperElectric
    }
}

/// `E.B = 0` with `|E| < |B|` beyond tolerance.
pub fn capture_surface_test(f: FieldEB, deg_tol: f64) -> bool {
    let inv = Invariants::of(&f);
    let thresh = deg_tol * inv.scale;
    inv.scale >= deg_tol * deg_tol && inv.eb.abs() < thresh && inv.b2 - inv.e2 >= thresh
}

/// `(lambda, nu, sigma, kappa)` of the generic eigenvector formula, with the
/// smaller of `lambda`, `nu` recovered from `lambda nu = |E.B|`.
fn generic_parameters(inv: &Invariants) -> (f64, f64, f64, f64) {
    let d = inv.b2 - inv.e2;
    let mu = d.hypot(2.0 * inv.eb);
    let (lambda, nu) = if d <= 0.0 {
        let lambda = (0.5 * (mu - d)).sqrt();
        (lambda, if lambda > 0.0 { inv.eb.abs() / lambda } else { 0.0 })
    } else {
        let nu = (0.5 * (mu + d)).sqrt();
        (inv.eb.abs() / nu, nu)
    };
    let sigma = 0.5 * (inv.scale + mu);
    (lambda, nu, sigma, inv.eb.signum())
}

fn roots_for(q: f64, class: FieldClass, f: &FieldEB) -> Vec<EigenRoot> {
    let inv = Invariants::of(f);
    let single = |edot: f64| EigenRoot { edot, multiplicity: 1 };
    if q == 0.0 {
        return vec![EigenRoot { edot: 0.0, multiplicity: 4 }];
    }
    match class {
        FieldClass::ZeroField | FieldClass::NullField => vec![EigenRoot { edot: 0.0, multiplicity: 4 }],
        FieldClass::PureB | FieldClass::OrthogonalSubMagnetic => vec![EigenRoot { edot: 0.0, multiplicity: 2 }],
        FieldClass::PureE | FieldClass::OrthogonalSuperElectric => {
            let w = (inv.e2 - inv.b2).sqrt();
            vec![single(q * w), single(-q * w), EigenRoot { edot: 0.0, multiplicity: 2 }]
        }
        FieldClass::Generic => {
            let (lambda, ..) = generic_parameters(&inv);
            vec![single(q * lambda), single(-q * lambda)]
        }
    }
}

/// Real roots of the eigenvalue quartic with multiplicities, classified at
/// the default degeneracy tolerance.
pub fn eigenvalue_roots(q: f64, f: FieldEB) -> Vec<EigenRoot> {
    roots_for(q, classify_field(f, DEFAULT_DEG_TOL), &f)
}

/// Classification, eigenvalues and admissible velocities of a field.
pub fn admissible_velocities(q: f64, f: FieldEB, deg_tol: f64) -> EigenSolution {
    let class = classify_field(f, deg_tol);
    let roots = roots_for(q, class, &f);
    let inv = Invariants::of(&f);
    let (e, b) = (f.e, f.b);
    let pair = |edot: f64, vp: Vec3, vm: Vec3| {
        vec![EigenVelocity { edot, v: vp }, EigenVelocity { edot: 0.0 - edot, v: vm }]
    };

    let unconstrained = q == 0.0 || class == FieldClass::ZeroField;
    let velocities = if unconstrained {
        Vec::new()
    } else {
        match class {
            FieldClass::ZeroField => Vec::new(),
            FieldClass::NullField => vec![EigenVelocity { edot: 0.0, v: e.cross(b) / inv.b2 }],
            FieldClass::PureE => {
                let n = e / inv.e2.sqrt();
                pair(q * inv.e2.sqrt(), n, -n)
            }
            FieldClass::PureB => {
                let n = b / inv.b2.sqrt();
                pair(0.0, n, -n)
            }
            FieldClass::OrthogonalSubMagnetic => {
                let drift = e.cross(b);
                let along = b * (inv.b2 - inv.e2).sqrt();
                pair(0.0, (drift + along) / inv.b2, (drift - along) / inv.b2)
            }
            FieldClass::OrthogonalSuperElectric => {
                let drift = e.cross(b);
                let w = (inv.e2 - inv.b2).sqrt();
                let along = e * w;
                pair(q * w, (drift + along) / inv.e2, (drift - along) / inv.e2)
            }
            FieldClass::Generic => {
                let (lambda, nu, sigma, kappa) = generic_parameters(&inv);
                let drift = e.cross(b);
                let along = e * lambda + b * (kappa * nu);
                pair(q * lambda, (drift + along) / sigma, (drift - along) / sigma)
            }
        }
    };
    EigenSolution { class, roots, velocities, unconstrained }
}

/// `edot^4 + edot^2 q^2 (B^2 - E^2) - q^4 (E.B)^2`.
pub fn quartic_residual(q: f64, f: FieldEB, edot: f64) -> f64 {
    let inv = Invariants::of(&f);
    let (e2, q2) = (edot * edot, q * q);
    e2 * e2 + e2 * q2 * (inv.b2 - inv.e2) - q2 * q2 * inv.eb * inv.eb
}

/// Residuals of the force balance: `(edot - q E.v, edot v - q (E + v x B))`.
pub fn balance_residual(q: f64, f: FieldEB, edot: f64, v: Vec3) -> (f64, Vec3) {
    (edot - q * f.e.dot(v), v * edot - (f.e + v.cross(f.b)) * q)
}

/// How far `v` is from being an admissible direction, relative to the field
/// scale: `|(E.v) v - E - v x B| / sqrt(E^2 + B^2)`. Zero for a zero field.
pub fn admissibility_residual(f: FieldEB, v: Vec3) -> f64 {
    let scale = f.scale().sqrt();
    if scale == 0.0 {
        return 0.0;
    }
    let r = v * f.e.dot(v) - f.e - v.cross(f.b);
    r.max_abs() / scale
}

/// Charge state with null four-velocity `(1, v)` and multiplier `e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParticleState {
    pub z: FourVector,
    pub v: Vec3,
    pub e: f64,
}

impl ParticleState {
    /// Four-momentum `e (1, v)`.
    pub fn p(&self) -> FourVector {
        FourVector::from_parts(self.e, self.v * self.e)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PropagateError {
    #[error("invalid propagation input: {0}")]
    InvalidInput(String),
    #[error("initial velocity is not an admissible eigenvector (residual {residual:e})")]
    InadmissibleInitialState { residual: f64 },
    #[error("velocity stopped being admissible at t = {t} (residual {residual:e}); the charge would radiate without bound")]
    RadiationDivergence { t: f64, residual: f64, partial: Vec<ParticleState> },
    #[error("multiplier e vanished near t = {t}")]
    MultiplierVanished { t: f64, partial: Vec<ParticleState> },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Unit-norm tolerance on the initial direction.
const DIRECTION_TOL: f64 = 1e-10;

/// Straight-line motion with the multiplier integrated from `edot = q E.v`.
///
/// The direction is held fixed; admissibility is checked at every half and
/// full step, and the multiplier advances with Simpson's rule per step.
pub fn propagate(
    q: f64,
    state0: ParticleState,
    field: &dyn ExternalField,
    t1: f64,
    dt: f64,
    admis_tol: f64,
) -> Result<Vec<ParticleState>, PropagateError> {
    let t0 = state0.z.t;
    let bad = |m: &str| Err(PropagateError::InvalidInput(m.to_owned()));
    if !(dt > 0.0 && dt.is_finite()) {
        return bad("dt must be positive");
    }
    if !(t1 >= t0 && t1.is_finite() && state0.z.is_finite()) {
        return bad("time range must be finite with t1 >= t0");
    }
    if !(admis_tol > 0.0) {
        return bad("admissibility tolerance must be positive");
    }
    if !((state0.v.norm() - 1.0).abs() <= DIRECTION_TOL) {
        return bad("initial direction must be a unit vector");
    }
    if !(state0.e != 0.0 && state0.e.is_finite()) {
        return bad("initial multiplier must be finite and non-zero");
    }

    let v = state0.v;
    let origin = state0.z;
    let event = |t: f64| FourVector::from_parts(t, origin.space() + v * (t - t0));
    let power = |f: &FieldEB| q * f.e.dot(v);

    let f0 = field.eval(origin)?;
    let residual = admissibility_residual(f0, v);
    if q != 0.0 && residual > admis_tol {
        return Err(PropagateError::InadmissibleInitialState { residual });
    }

    let steps = ((t1 - t0) / dt).ceil().max(0.0) as usize;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(ParticleState { z: origin, v, e: state0.e });
    let (mut e, mut g_prev) = (state0.e, power(&f0));
    for k in 1..=steps {
        let ta = t0 + dt * (k - 1) as f64;
        let tb = if k == steps { t1 } else { t0 + dt * k as f64 };
        let (mid, end) = (event(0.5 * (ta + tb)), event(tb));
        let (fm, fb) = (field.eval(mid)?, field.eval(end)?);
        if q != 0.0 {
            for (f, t) in [(fm, mid.t), (fb, tb)] {
                let residual = admissibility_residual(f, v);
                if residual > admis_tol {
                    return Err(PropagateError::RadiationDivergence { t, residual, partial: out });
                }
            }
        }
        let g_end = power(&fb);
        let next = e + (tb - ta) / 6.0 * (g_prev + 4.0 * power(&fm) + g_end);
        if next == 0.0 || next.signum() != e.signum() {
            return Err(PropagateError::MultiplierVanished { t: tb, partial: out });
        }
        e = next;
        g_prev = g_end;
        out.push(ParticleState { z: end, v, e });
    }
    Ok(out)
}

/// One grid point of a velocity map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapRecord {
    pub point: Vec3,
    pub field: FieldEB,
    pub class: FieldClass,
    pub capture: bool,
    pub plus: Option<EigenVelocity>,
    pub minus: Option<EigenVelocity>,
    pub unconstrained: bool,
}

/// Classification and admissible velocities at one point.
pub fn map_record(point: Vec3, field: FieldEB, q: f64, deg_tol: f64) -> MapRecord {
    let sol = admissible_velocities(q, field, deg_tol);
    MapRecord {
        point,
        field,
        class: sol.class,
        capture: capture_surface_test(field, deg_tol),
        plus: sol.velocities.first().copied(),
        minus: sol.velocities.get(1).copied(),
        unconstrained: sol.unconstrained,
    }
}

/// Evaluates [`map_record`] over a grid at time `t`, in grid order.
pub fn velocity_map(
    field: &dyn ExternalField,
    grid: &[Vec3],
    t: f64,
    q: f64,
    deg_tol: f64,
) -> Result<Vec<MapRecord>, FieldError> {
    grid.par_iter()
        .map(|&p| {
            let f = field.eval(FourVector::from_parts(t, p))?;
            Ok(map_record(p, f, q, deg_tol))
        })
        .collect()
}
