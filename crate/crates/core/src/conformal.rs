//! Dilatations and special conformal transformations of points, fields and
//! the multiplier of a massless charge.
//!
//! Under `x' = e^theta x` the field scales as `F' = e^{-2 theta} F` and the
//! multiplier as `e' = e^{-2 theta} e`. Under the special conformal map
//! `x' = (x - b (x.x)) / D` with Jacobian `Omega`, `F_ab = F'_mn Omega^m_a
//! Omega^n_b` and `e' = D^2 e`.

use serde::Serialize;
use thiserror::Error;

use crate::eigen::{admissible_velocities, DEFAULT_DEG_TOL};
use crate::minkowski::{
    mat4_apply, mat4_frobenius, mat4_mul, mat4_transpose, mdot, EmTensor, FieldEB, FourVector, Mat4, Vec3, ETA,
    em_tensor_from_eb,
};

/// `|D|` below this is treated as the singular set of the map.
pub const D_MIN: f64 = 1e-14;
/// Relative threshold on `|x.x| / |x|^2` for the light-cone test.
pub const LIGHT_CONE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ConformalError {
    #[error("conformal factor D = {d:e} vanishes at this point")]
    DegenerateD { d: f64 },
    #[error("point lies on the light cone (x.x = {norm:e}); the Jacobian factors are singular")]
    LightConePoint { norm: f64 },
    #[error("non-finite input")]
    NonFinite,
}

/// Group parameters: a dilatation `theta_dil` and a special conformal `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConformalParams {
    pub theta_dil: f64,
    pub b: FourVector,
}

impl ConformalParams {
    pub fn dilatation(theta: f64) -> Self {
        ConformalParams { theta_dil: theta, b: FourVector::ZERO }
    }

    pub fn special(b: FourVector) -> Self {
        ConformalParams { theta_dil: 0.0, b }
    }
}

/// `Omega^m_a = d x'^m / d x^a` and the conformal factor `D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConformalJacobian {
    pub omega: Mat4,
    pub d: f64,
}

pub const IDENTITY: Mat4 = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];

impl ConformalJacobian {
    pub const IDENTITY: ConformalJacobian = ConformalJacobian { omega: IDENTITY, d: 1.0 };

    /// `Omega^{-1} = D^2 eta Omega^T eta`.
    pub fn inverse_omega(&self) -> Mat4 {
        let m = mat4_mul(&ETA, &mat4_mul(&mat4_transpose(&self.omega), &ETA));
        m.map(|row| row.map(|c| c * self.d * self.d))
    }

    /// Frobenius norm of `Omega^T eta Omega - D^{-2} eta`.
    pub fn metric_defect(&self) -> f64 {
        let g = mat4_mul(&mat4_transpose(&self.omega), &mat4_mul(&ETA, &self.omega));
        let s = 1.0 / (self.d * self.d);
        let mut diff = g;
        for (i, row) in diff.iter_mut().enumerate() {
            for (j, c) in row.iter_mut().enumerate() {
                *c -= s * ETA[i][j];
            }
        }
        mat4_frobenius(&diff)
    }
}

pub fn dilate(x: FourVector, theta: f64) -> FourVector {
    x * theta.exp()
}

pub fn conformal_factor(x: FourVector, b: FourVector) -> f64 {
    1.0 - 2.0 * mdot(x, b) + mdot(x, x) * mdot(b, b)
}

/// `(x', D)` with `x' = (x - b (x.x)) / D`.
pub fn special_conformal(x: FourVector, b: FourVector) -> Result<(FourVector, f64), ConformalError> {
    if !(x.is_finite() && b.is_finite()) {
        return Err(ConformalError::NonFinite);
    }
    let d = conformal_factor(x, b);
    if !(d.abs() >= D_MIN) {
        return Err(ConformalError::DegenerateD { d });
    }
    Ok(((x - b * mdot(x, x)) / d, d))
}

/// The inverse of [`special_conformal`] with parameter `b` is the same map
/// with `-b`.
pub fn inverse_special_conformal(xp: FourVector, b: FourVector) -> Result<FourVector, ConformalError> {
    special_conformal(xp, -b).map(|(x, _)| x)
}

/// Inversion reflection `lambda^b_a(y) = delta^b_a - 2 y^b y_a / (y.y)`.
fn lambda(y: FourVector, yy: f64) -> Mat4 {
    let (up, low) = (y.to_array(), y.lower());
    let mut m = IDENTITY;
    for (i, row) in m.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            *c -= 2.0 * up[i] * low[j] / yy;
        }
    }
    m
}

fn off_cone(y: FourVector) -> Result<f64, ConformalError> {
    let yy = mdot(y, y);
    let scale = y.to_array().iter().map(|c| c * c).sum::<f64>();
    if !(yy.abs() >= LIGHT_CONE_TOL * scale) || yy == 0.0 {
        return Err(ConformalError::LightConePoint { norm: yy });
    }
    Ok(yy)
}

/// Sampling criterion for numerical checks: `|x.x| >= 0.1 max|x^m|^2` and
/// `|D| >= 0.5`. The factored Jacobian loses roughly `(|x|^2 / |x.x|)^2`
/// digits near the light cone, so checks at 1e-10 need this margin.
pub fn well_conditioned(x: FourVector, b: FourVector) -> bool {
    let xx = mdot(x, x);
    if !(xx.abs() >= 0.1 * x.max_abs().powi(2)) {
        return false;
    }
    conformal_factor(x, b).abs() >= 0.5 && conformal_jacobian(x, b).is_ok()
}

/// Jacobian of the special conformal map in the factored form
/// `Omega = D^{-1} lambda(x'') lambda(x)`, `x'' = x / (x.x) - b`.
pub fn conformal_jacobian(x: FourVector, b: FourVector) -> Result<ConformalJacobian, ConformalError> {
    let (_, d) = special_conformal(x, b)?;
    let xx = off_cone(x)?;
    let x2 = x / xx - b;
    let x2x2 = off_cone(x2)?;
    let omega = mat4_mul(&lambda(x2, x2x2), &lambda(x, xx)).map(|row| row.map(|c| c / d));
    Ok(ConformalJacobian { omega, d })
}

/// `F'` from `F_ab = F'_mn Omega^m_a Omega^n_b`, i.e.
/// `F' = Omega^{-T} F Omega^{-1}` on covariant components.
pub fn transform_field_special(f: &EmTensor, j: &ConformalJacobian) -> EmTensor {
    let inv = j.inverse_omega();
    let cov = mat4_mul(&mat4_transpose(&inv), &mat4_mul(&f.covariant(), &inv));
    EmTensor::from_covariant(&cov)
}

/// Pulls a transformed field back: `F_ab = F'_mn Omega^m_a Omega^n_b`.
pub fn pull_back_field(fp: &EmTensor, j: &ConformalJacobian) -> EmTensor {
    let cov = mat4_mul(&mat4_transpose(&j.omega), &mat4_mul(&fp.covariant(), &j.omega));
    EmTensor::from_covariant(&cov)
}

/// `F' = e^{-2 theta} F`.
pub fn transform_field_dilatation(f: &EmTensor, theta: f64) -> EmTensor {
    f.scaled((-2.0 * theta).exp())
}

/// Field at `x' = e^theta SC_b(x)` given the field at `x`. The identity
/// parameter `b = 0` is handled exactly.
pub fn transform_field(f: &EmTensor, x: FourVector, params: ConformalParams) -> Result<EmTensor, ConformalError> {
    let special = if params.b == FourVector::ZERO {
        *f
    } else {
        transform_field_special(f, &conformal_jacobian(x, params.b)?)
    };
    Ok(transform_field_dilatation(&special, params.theta_dil))
}

/// Image of `x` under the composite `e^theta SC_b`.
pub fn transform_point(x: FourVector, params: ConformalParams) -> Result<FourVector, ConformalError> {
    let xp = if params.b == FourVector::ZERO { x } else { special_conformal(x, params.b)?.0 };
    Ok(dilate(xp, params.theta_dil))
}

/// Largest deviation of `F -> F' -> F` through the inverse map at the image
/// point, relative to `max |F|`.
pub fn field_round_trip(f: &EmTensor, x: FourVector, b: FourVector) -> Result<f64, ConformalError> {
    let j = conformal_jacobian(x, b)?;
    let fp = transform_field_special(f, &j);
    let (xp, _) = special_conformal(x, b)?;
    let back = transform_field_special(&fp, &conformal_jacobian(xp, -b)?);
    let diff = (back + f.scaled(-1.0)).max_abs();
    let scale = f.max_abs();
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

/// Equation-of-motion residual of one admissible direction before and after
/// the transformation, in laboratory-time parametrization.
struct Balance {
    /// `d(e zdot)/dt - q F zdot` in the original variables.
    original: FourVector,
    /// The same balance in the transformed variables.
    transformed: FourVector,
    scale: f64,
}

fn balance(q: f64, f: &EmTensor, x: FourVector, v: Vec3, edot: f64, params: ConformalParams) -> Result<Balance, ConformalError> {
    let e = 1.0;
    let k = FourVector::from_parts(1.0, v);
    let force = crate::minkowski::lorentz_force(q, f, k);
    let original = k * edot - force;

    let (omega, d, fp, extra) = if params.b == FourVector::ZERO {
        (IDENTITY, 1.0, *f, FourVector::ZERO)
    } else {
        let b = params.b;
        let j = conformal_jacobian(x, b)?;
        // along x + t k the image point is N(t) / D(t); d(D^2 Omega k)/dt = N'' D - N D''
        let kk = mdot(k, k);
        let n = x - b * mdot(x, x);
        let n2 = b * (-2.0 * kk);
        let d2 = 2.0 * kk * mdot(b, b);
        (j.omega, j.d, transform_field_special(f, &j), n2 * j.d - n * d2)
    };
    let dil = params.theta_dil.exp();
    let kp = mat4_apply(&omega, k) * dil;
    let fp = transform_field_dilatation(&fp, params.theta_dil);
    // e' = D^2 e^{-2 theta} e, so p' = e' k' = e D^2 e^{-theta} Omega k
    let w = d * d / dil;
    let dp = mat4_apply(&omega, k * edot) * w + extra * (e / dil);
    let transformed = dp - crate::minkowski::lorentz_force(q, &fp, kp);
    let field_scale = q.abs() * f.to_eb().scale().sqrt();
    let scale = w * crate::minkowski::mat4_max_abs(&omega) * (field_scale + edot.abs()).max(f64::MIN_POSITIVE);
    Ok(Balance { original, transformed, scale })
}

/// Covariance defect of the effective equation `edot v = q F v` under the
/// composite map `e^theta SC_b` at the event `x`.
///
/// Every admissible direction of `f` (or `z` if the field leaves motion
/// unconstrained) is taken with unit multiplier. The transformed balance
/// must equal `D^2 e^{-theta} Omega` applied to the original balance, so the
/// residual vanishes to rounding whether or not the original balance is
/// exactly zero. Returned relative to the size of the transformed force.
pub fn eom_invariance_residual(q: f64, f: FieldEB, x: FourVector, params: ConformalParams) -> Result<f64, ConformalError> {
    if !(q.is_finite() && f.e.is_finite() && f.b.is_finite() && params.theta_dil.is_finite()) {
        return Err(ConformalError::NonFinite);
    }
    let sol = admissible_velocities(q, f, DEFAULT_DEG_TOL);
    let dirs: Vec<(Vec3, f64)> = if sol.unconstrained {
        vec![(Vec3::Z, 0.0)]
    } else {
        sol.velocities.iter().map(|ev| (ev.v, ev.edot)).collect()
    };
    let tensor = em_tensor_from_eb(f);
    let (omega, d) = if params.b == FourVector::ZERO {
        (IDENTITY, 1.0)
    } else {
        let j = conformal_jacobian(x, params.b)?;
        (j.omega, j.d)
    };
    let w = d * d / params.theta_dil.exp();
    let mut worst: f64 = 0.0;
    for (v, edot) in dirs {
        let bal = balance(q, &tensor, x, v, edot, params)?;
        let expected = mat4_apply(&omega, bal.original) * w;
        let defect = (bal.transformed - expected).max_abs();
        worst = worst.max(defect / bal.scale);
    }
    Ok(worst)
}
