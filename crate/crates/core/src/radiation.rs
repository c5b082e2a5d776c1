//! Radiated energy-momentum and angular momentum of a photon-like charge.
//!
//! The flux through the hyperplane `x0 = t` factorizes into a polar-angle
//! factor, which diverges at the forward direction, and a worldline integral.
//! The lower polar-angle cutoff `epsilon` is therefore a required argument and
//! the factors are returned in closed form on `[epsilon, pi]`.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::minkowski::{mdot, rotation_to_velocity, EmTensor, FourVector, Mat4, MinkowskiError, ETA};
use rayon::prelude::*;

use crate::quadrature::{composite_gauss, integrate, integrate_scalar, QuadratureError, Tolerance};
use crate::retarded::{RetardedError, RetardedFrame};
use crate::worldline::NullWorldline;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum RadiationError {
    #[error("cutoff must satisfy 0 < epsilon <= pi, got {0}")]
    BadCutoff(f64),
    #[error("invalid curvilinear coordinates: {0}")]
    BadCoordinates(&'static str),
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error("observation time {t} outside worldline domain ({t_min}, {t_max}]")]
    OutsideDomain { t: f64, t_min: f64, t_max: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Retarded(#[from] RetardedError),
    #[error(transparent)]
    Rotation(#[from] MinkowskiError),
}

/// Polar-angle factors `I0`, `I1` integrated over `[epsilon, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffFactors {
    pub epsilon: f64,
    #[serde(rename = "I0")]
    pub i0: f64,
    #[serde(rename = "I1")]
    pub i1: f64,
}

fn check_cutoff(epsilon: f64) -> Result<(), RadiationError> {
    if epsilon > 0.0 && epsilon <= PI {
        Ok(())
    } else {
        Err(RadiationError::BadCutoff(epsilon))
    }
}

/// Closed forms: with `u = 1 - cos(epsilon)`,
/// `I0 = 1/(2u^2) - 1/8` and `I1 = 3/8 - 1/u + 1/(2u^2)`.
pub fn cutoff_factors(epsilon: f64) -> Result<CutoffFactors, RadiationError> {
    check_cutoff(epsilon)?;
    let half = (0.5 * epsilon).sin();
    let u = 2.0 * half * half;
    let inv = 1.0 / u;
    Ok(CutoffFactors {
        epsilon,
        i0: 0.5 * inv * inv - 0.125,
        i1: 0.375 - inv + 0.5 * inv * inv,
    })
}

/// The same factors by adaptive quadrature of the polar integrands.
pub fn cutoff_factors_quadrature(epsilon: f64, tol: f64) -> Result<CutoffFactors, RadiationError> {
    check_cutoff(epsilon)?;
    let tol = Tolerance::relative(tol);
    let i0 = integrate_scalar(|th| th.sin() / (1.0 - th.cos()).powi(3), epsilon, PI, tol)?;
    let i1 = integrate_scalar(|th| th.sin() * th.cos() / (1.0 - th.cos()).powi(3), epsilon, PI, tol)?;
    Ok(CutoffFactors { epsilon, i0, i1 })
}

/// Radiative stress-energy `q^2 a^2 k^a k^b / (4 pi r^2)`.
pub fn stress_energy(q: f64, fr: &RetardedFrame) -> Result<Mat4, RetardedError> {
    let r_min = fr.r_min();
    if !(fr.r > 0.0 && fr.r >= r_min) {
        return Err(RetardedError::RadiusUnderflow { r: fr.r, r_min });
    }
    let c = q * q * mdot(fr.a, fr.a) / (4.0 * PI * fr.r * fr.r);
    let k = fr.k.to_array();
    Ok(std::array::from_fn(|a| std::array::from_fn(|b| c * k[a] * k[b])))
}

/// Maxwell stress-energy `(f^{ml} f^n_l - eta^{mn} f^{kl} f_{kl} / 4) / (4 pi)`.
pub fn stress_energy_from_field(f: &EmTensor) -> Mat4 {
    let upper = f.contravariant();
    let invariant = f.contraction();
    std::array::from_fn(|m| {
        std::array::from_fn(|n| {
            let ff: f64 = (0..4).map(|l| upper[m][l] * upper[n][l] * ETA[l][l]).sum();
            (ff - 0.25 * ETA[m][n] * invariant) / (4.0 * PI)
        })
    })
}

/// Point of the wavefront emitted at `s`, seen on the hyperplane `x0 = t` in
/// direction `(theta, phi)` relative to the momentary velocity, together with
/// the volume density `(t - s)^2 sin(theta) (1 - cos(theta))`.
pub fn curvilinear_to_cartesian(
    w: &dyn NullWorldline,
    t: f64,
    s: f64,
    theta: f64,
    phi: f64,
) -> Result<(FourVector, f64), RadiationError> {
    if !(s < t) {
        return Err(RadiationError::BadCoordinates("requires s < t"));
    }
    if !(0.0..=PI).contains(&theta) || !phi.is_finite() {
        return Err(RadiationError::BadCoordinates("theta must lie in [0, pi]"));
    }
    let p = w.point(s);
    let rot = rotation_to_velocity(p.velocity)?;
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let n = FourVector::new(1.0, st * cp, st * sp, ct);
    let dt = t - s;
    let x = p.event() + rot.apply4(n) * dt;
    let half = (0.5 * theta).sin();
    Ok((x, dt * dt * st * 2.0 * half * half))
}

/// Radiated energy-momentum and angular momentum on the hyperplane `x0 = t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxResult {
    pub p_em: FourVector,
    /// Antisymmetric, contravariant `M^{mu nu}`.
    pub m_em: Mat4,
    pub epsilon: f64,
    pub t: f64,
    pub factors: CutoffFactors,
}

/// Worldline moments `[a^2, a^2 v, a^2 s v, a^2 z, a^2 (z^i v^j - z^j v^i)]`
/// over `[s0, s1]`; the last block is ordered `(12, 13, 23)`.
fn worldline_moments(w: &dyn NullWorldline, s0: f64, s1: f64, tol: f64) -> Result<[f64; 13], RadiationError> {
    let moments = integrate(
        |s| {
            let p = w.point(s);
            let a2 = p.acceleration.norm_sqr();
            let (z, v) = (p.position, p.velocity);
            [
                a2,
                a2 * v.x,
                a2 * v.y,
                a2 * v.z,
                a2 * s * v.x,
                a2 * s * v.y,
                a2 * s * v.z,
                a2 * z.x,
                a2 * z.y,
                a2 * z.z,
                a2 * (z.x * v.y - z.y * v.x),
                a2 * (z.x * v.z - z.z * v.x),
                a2 * (z.y * v.z - z.z * v.y),
            ]
        },
        s0,
        s1,
        Tolerance::relative(tol),
    )?;
    Ok(moments)
}

fn check_time(w: &dyn NullWorldline, t: f64) -> Result<(f64, f64), RadiationError> {
    let (t_min, t_max) = w.domain();
    if t > t_min && t <= t_max {
        Ok((t_min, t_max))
    } else {
        Err(RadiationError::OutsideDomain { t, t_min, t_max })
    }
}

/// Energy-momentum radiated between emission times `s0` and `s1`.
pub fn radiated_momentum_between(
    q: f64,
    w: &dyn NullWorldline,
    s0: f64,
    s1: f64,
    epsilon: f64,
    quad_tol: f64,
) -> Result<FourVector, RadiationError> {
    let factors = cutoff_factors(epsilon)?;
    let m = worldline_moments(w, s0, s1, quad_tol)?;
    let c = 0.5 * q * q;
    Ok(FourVector::new(
        c * factors.i0 * m[0],
        c * factors.i1 * m[1],
        c * factors.i1 * m[2],
        c * factors.i1 * m[3],
    ))
}

/// Energy-momentum emitted over `[t_min, t]` and found on the hyperplane `x0 = t`.
pub fn radiated_momentum(
    q: f64,
    w: &dyn NullWorldline,
    t: f64,
    epsilon: f64,
    quad_tol: f64,
) -> Result<FourVector, RadiationError> {
    let (t_min, _) = check_time(w, t)?;
    radiated_momentum_between(q, w, t_min, t, epsilon, quad_tol)
}

/// Angular momentum `M^{mu nu}` emitted over `[t_min, t]`.
pub fn radiated_angular_momentum(
    q: f64,
    w: &dyn NullWorldline,
    t: f64,
    epsilon: f64,
    quad_tol: f64,
) -> Result<Mat4, RadiationError> {
    radiated_flux(q, w, t, epsilon, quad_tol).map(|f| f.m_em)
}

/// Energy-momentum and angular momentum from one worldline quadrature pass.
pub fn radiated_flux(
    q: f64,
    w: &dyn NullWorldline,
    t: f64,
    epsilon: f64,
    quad_tol: f64,
) -> Result<FluxResult, RadiationError> {
    let factors = cutoff_factors(epsilon)?;
    let (t_min, _) = check_time(w, t)?;
    let m = worldline_moments(w, t_min, t, quad_tol)?;
    let c = 0.5 * q * q;
    let (i0, i1) = (factors.i0, factors.i1);
    let p_em = FourVector::new(c * i0 * m[0], c * i1 * m[1], c * i1 * m[2], c * i1 * m[3]);

    let mut m_em = [[0.0; 4]; 4];
    for i in 0..3 {
        let v = c * (i1 * m[4 + i] - i0 * m[7 + i]);
        m_em[0][i + 1] = v;
        m_em[i + 1][0] = -v;
    }
    for (k, (i, j)) in [(1, 2), (1, 3), (2, 3)].into_iter().enumerate() {
        let v = c * i1 * m[10 + k];
        m_em[i][j] = v;
        m_em[j][i] = -v;
    }
    Ok(FluxResult { p_em, m_em, epsilon, t, factors })
}

/// Resolution of [`angular_flux_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularQuadrature {
    /// Uniform panels in the retarded time.
    pub s_panels: usize,
    /// Geometrically graded panels in the polar angle, refined towards the cutoff.
    pub theta_panels: usize,
    /// Gauss-Legendre nodes per panel.
    pub order: usize,
    /// Trapezoid nodes in the azimuth.
    pub phi_nodes: usize,
}

impl Default for AngularQuadrature {
    fn default() -> Self {
        AngularQuadrature { s_panels: 16, theta_panels: 12, order: 16, phi_nodes: 32 }
    }
}

/// Brute-force flux: integrates `T^{0 mu}` and the angular-momentum density
/// `x^mu T^{0 nu} - x^nu T^{0 mu}` over the hyperplane `x0 = t` in the
/// curvilinear chart `(s, theta, phi)` with `theta` restricted to
/// `[epsilon, pi]`. The stress-energy at each point comes from the retarded
/// frame of that point, so this path does not use the factorized form.
///
/// Composite Gauss-Legendre in `s` and `theta`, periodic trapezoid in `phi`.
/// The azimuthal dependence is a low-degree trigonometric polynomial, so the
/// trapezoid is exact there once `phi_nodes` exceeds its degree.
pub fn angular_flux_quadrature(
    q: f64,
    w: &dyn NullWorldline,
    t: f64,
    epsilon: f64,
    opts: AngularQuadrature,
) -> Result<(FourVector, Mat4), RadiationError> {
    check_cutoff(epsilon)?;
    let (t_min, _) = check_time(w, t)?;
    if opts.s_panels == 0 || opts.theta_panels == 0 || opts.order == 0 || opts.phi_nodes == 0 {
        return Err(RadiationError::InvalidInput("quadrature resolution must be positive"));
    }

    let density = |s: f64, theta: f64, phi: f64| -> Result<[f64; 10], RadiationError> {
        let (x, jac) = curvilinear_to_cartesian(w, t, s, theta, phi)?;
        let fr = RetardedFrame::at_emission(w, x, s);
        let tm = stress_energy(q, &fr)?;
        let xs = x.to_array();
        let t0: [f64; 4] = tm[0];
        let mut out = [0.0; 10];
        out[..4].copy_from_slice(&t0);
        let mut k = 4;
        for mu in 0..4 {
            for nu in (mu + 1)..4 {
                out[k] = xs[mu] * t0[nu] - xs[nu] * t0[mu];
                k += 1;
            }
        }
        Ok(out.map(|v| v * jac))
    };

    let np = opts.s_panels as f64;
    let s_edges: Vec<f64> = (0..=opts.s_panels).map(|j| t_min + (t - t_min) * j as f64 / np).collect();
    let ratio = PI / epsilon;
    let nt = opts.theta_panels as f64;
    let theta_edges: Vec<f64> = (0..=opts.theta_panels)
        .map(|j| if j == opts.theta_panels { PI } else { epsilon * ratio.powf(j as f64 / nt) })
        .collect();
    let s_rule = composite_gauss(&s_edges, opts.order);
    let theta_rule = composite_gauss(&theta_edges, opts.order);
    let dphi = 2.0 * PI / opts.phi_nodes as f64;

    let slices: Vec<Result<[f64; 10], RadiationError>> = s_rule
        .par_iter()
        .map(|&(s, ws)| {
            let mut acc = [0.0; 10];
            for &(theta, wt) in &theta_rule {
                for k in 0..opts.phi_nodes {
                    let d = density(s, theta, k as f64 * dphi)?;
                    let wgt = ws * wt * dphi;
                    for (a, v) in acc.iter_mut().zip(d) {
                        *a += wgt * v;
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = [0.0; 10];
    for slice in slices {
        for (a, v) in total.iter_mut().zip(slice?) {
            *a += v;
        }
    }

    let p = FourVector::new(total[0], total[1], total[2], total[3]);
    let mut m = [[0.0; 4]; 4];
    let mut k = 4;
    for mu in 0..4 {
        for nu in (mu + 1)..4 {
            m[mu][nu] = total[k];
            m[nu][mu] = -total[k];
            k += 1;
        }
    }
    Ok((p, m))
}
