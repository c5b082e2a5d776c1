//! Retarded-time solver and the Liénard-Wiechert field of a null worldline.
//!
//! The retarded time `s` of an observation event `x` is the latest root of
//! `g(s) = (x0 - s) - |x - z(s)|`. For a unit-speed source `g` is
//! non-increasing, and it is flat exactly when `x` lies on the forward tangent
//! ray, where the retarded distance vanishes and the field is singular.

use thiserror::Error;

use crate::minkowski::{mdot, wedge, EmTensor, FourVector, Mat4, ETA};
use crate::worldline::NullWorldline;

/// Default bisection tolerance, relative to `1 + |s|`.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Singular-ray guard: `r` below this fraction of `x0 - s` is treated as on-ray.
pub const R_MIN_REL: f64 = 1e-9;
/// Number of cells in the bracketing scan over the worldline domain.
pub const SCAN_CELLS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum RetardedError {
    #[error("past light cone of the observation point does not meet the worldline domain")]
    NoIntersection,
    #[error("observation point lies on the singular ray (r = {r:e}, r_min = {r_min:e})")]
    SingularRay { r: f64, r_min: f64 },
    #[error("retarded-time roots near s = {first} and s = {second} cannot be separated")]
    AmbiguousRoot { first: f64, second: f64 },
    #[error("retarded distance {r:e} below guard {r_min:e}")]
    RadiusUnderflow { r: f64, r_min: f64 },
    #[error("tolerance and step sizes must be positive and finite")]
    BadParameter,
}

/// Retarded kinematics at one observation event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetardedFrame {
    /// Retarded time.
    pub s: f64,
    /// Retarded distance `-(R.u)`.
    pub r: f64,
    /// Null separation `x - z(s)`.
    pub big_r: FourVector,
    /// `R / r`, normalized so that `k.u = -1`.
    pub k: FourVector,
    pub u: FourVector,
    pub a: FourVector,
    /// `a.k`
    pub a_k: f64,
}

impl RetardedFrame {
    /// Frame for an observation event and a known emission time.
    pub fn at_emission(w: &dyn NullWorldline, x: FourVector, s: f64) -> Self {
        let p = w.point(s);
        let big_r = x - p.event();
        let u = p.four_velocity();
        let a = p.four_acceleration();
        let r = -mdot(big_r, u);
        let k = big_r / r;
        RetardedFrame { s, r, big_r, k, u, a, a_k: mdot(a, k) }
    }

    /// Guard value `R_MIN_REL * (x0 - s)`.
    pub fn r_min(&self) -> f64 {
        R_MIN_REL * self.big_r.t
    }

    fn guard(&self) -> Result<(), RetardedError> {
        let r_min = self.r_min();
        if self.r.is_finite() && self.r >= r_min && self.r > 0.0 {
            Ok(())
        } else {
            Err(RetardedError::RadiusUnderflow { r: self.r, r_min })
        }
    }

    /// `ds/dx^alpha = -k_alpha` (covariant components).
    pub fn grad_s(&self) -> [f64; 4] {
        self.k.lower().map(|c| -c)
    }

    /// `dr/dx^alpha = -u_alpha + r a_k k_alpha`.
    pub fn grad_r(&self) -> [f64; 4] {
        let (u, k) = (self.u.lower(), self.k.lower());
        std::array::from_fn(|i| -u[i] + self.r * self.a_k * k[i])
    }

    /// `dk_alpha/dx^beta`, indexed `[alpha][beta]`.
    pub fn grad_k(&self) -> Mat4 {
        let (u, k) = (self.u.lower(), self.k.lower());
        let mut out = [[0.0; 4]; 4];
        for (al, row) in out.iter_mut().enumerate() {
            for (be, v) in row.iter_mut().enumerate() {
                *v = (u[al] * k[be] + u[be] * k[al] + ETA[al][be]) / self.r - self.a_k * k[al] * k[be];
            }
        }
        out
    }
}

fn defining_fn(w: &dyn NullWorldline, x: FourVector, s: f64) -> f64 {
    let z = w.point(s).position;
    (x.t - s) - (x.space() - z).norm()
}

/// Latest emission time on `w` whose future light cone contains `x`.
///
/// A downward scan with `SCAN_CELLS` cells over the worldline domain brackets
/// the latest sign change of the defining function, which is then bisected to
/// `|ds| <= tol (1 + |s|)` and polished with Newton steps kept inside the
/// bracket.
pub fn retarded_time(w: &dyn NullWorldline, x: FourVector, tol: f64) -> Result<f64, RetardedError> {
    if !(tol > 0.0 && tol.is_finite()) || !x.is_finite() {
        return Err(RetardedError::BadParameter);
    }
    let (t_min, t_max) = w.domain();
    if x.t <= t_min {
        return Err(RetardedError::NoIntersection);
    }
    let upper = x.t.min(t_max);
    let step = (t_max - t_min) / SCAN_CELLS as f64;
    let noise = 1e-12 * (1.0 + x.t.abs() + x.space().max_abs() + t_min.abs().max(t_max.abs()));

    let mut grid = Vec::with_capacity(SCAN_CELLS + 2);
    let mut s = upper;
    loop {
        grid.push((s, defining_fn(w, x, s)));
        if s <= t_min {
            break;
        }
        s = (s - step).max(t_min);
    }

    if grid[0].1 > 0.0 {
        // root lies after t_max
        return Err(RetardedError::NoIntersection);
    }

    // brackets (lo, hi) with g(lo) > 0 >= g(hi), latest first
    let mut brackets = Vec::new();
    let mut non_monotone = false;
    for pair in grid.windows(2) {
        let ((hi, g_hi), (lo, g_lo)) = (pair[0], pair[1]);
        if g_lo < g_hi - noise {
            non_monotone = true;
        }
        if g_lo > 0.0 && g_hi <= 0.0 {
            brackets.push((lo, hi));
        }
    }

    let Some(&(lo, hi)) = brackets.first() else {
        let &(_, g_last) = grid.last().expect("scan is non-empty");
        if g_last.abs() <= noise {
            return Err(RetardedError::SingularRay { r: 0.0, r_min: 0.0 });
        }
        return Err(RetardedError::NoIntersection);
    };

    let root = bisect(w, x, lo, hi, tol);
    if non_monotone && brackets.len() > 1 {
        let (lo2, hi2) = brackets[1];
        if hi2 >= lo - step * 1e-9 {
            let second = bisect(w, x, lo2, hi2, tol);
            return Err(RetardedError::AmbiguousRoot { first: root, second });
        }
    }

    let frame = RetardedFrame::at_emission(w, x, root);
    let r_min = frame.r_min();
    if !(frame.big_r.t > 0.0) || !(frame.r >= r_min) {
        return Err(RetardedError::SingularRay { r: frame.r.max(0.0), r_min });
    }
    Ok(root)
}

fn bisect(w: &dyn NullWorldline, x: FourVector, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol * (1.0 + lo.abs().max(hi.abs())) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if defining_fn(w, x, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..3 {
        let p = w.point(s);
        let sep = x.space() - p.position;
        let dist = sep.norm();
        let g = (x.t - s) - dist;
        let slope = -1.0 + p.velocity.dot(sep) / dist;
        if g == 0.0 || !(slope < 0.0) {
            break;
        }
        let next = s - g / slope;
        if !(next >= lo && next <= hi) {
            break;
        }
        s = next;
    }
    s
}

/// Retarded kinematic packet at `x`.
pub fn retarded_frame(w: &dyn NullWorldline, x: FourVector, tol: f64) -> Result<RetardedFrame, RetardedError> {
    let s = retarded_time(w, x, tol)?;
    Ok(RetardedFrame::at_emission(w, x, s))
}

/// Contravariant Liénard-Wiechert potential `A^alpha = q u^alpha / r`.
pub fn lw_potential(q: f64, fr: &RetardedFrame) -> Result<FourVector, RetardedError> {
    fr.guard()?;
    Ok(fr.u * (q / fr.r))
}

/// Far field `q (a ^ k + a_k u ^ k) / r`.
pub fn field_tensor(q: f64, fr: &RetardedFrame) -> Result<EmTensor, RetardedError> {
    fr.guard()?;
    let c = q / fr.r;
    let mut m = wedge(fr.a + fr.u * fr.a_k, fr.k);
    m.iter_mut().flatten().for_each(|v| *v *= c);
    Ok(EmTensor::from_contravariant(&m))
}

/// Retarded distance, the closeness measure to the singular ray.
pub fn singular_ray_distance(w: &dyn NullWorldline, x: FourVector) -> Result<f64, RetardedError> {
    retarded_frame(w, x, DEFAULT_TOL).map(|f| f.r)
}

/// Second-order central-difference estimate of `box A^alpha` at `x`.
///
/// Requires the retarded distance at `x` to be at least `10 h`.
pub fn wave_operator_residual(
    q: f64,
    w: &dyn NullWorldline,
    x: FourVector,
    h: f64,
) -> Result<[f64; 4], RetardedError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(RetardedError::BadParameter);
    }
    let centre = retarded_frame(w, x, DEFAULT_TOL)?;
    if centre.r < 10.0 * h {
        return Err(RetardedError::SingularRay { r: centre.r, r_min: 10.0 * h });
    }
    let potential = |p: FourVector| -> Result<[f64; 4], RetardedError> {
        let fr = retarded_frame(w, p, DEFAULT_TOL)?;
        lw_potential(q, &fr).map(FourVector::to_array)
    };
    let a0 = potential(x)?;
    let mut out = [0.0; 4];
    let xs = x.to_array();
    for mu in 0..4 {
        // use the steps actually representable at x so the stencil stays centred
        let (mut up, mut down) = (xs, xs);
        up[mu] += h;
        down[mu] -= h;
        let (hp, hm) = (up[mu] - xs[mu], xs[mu] - down[mu]);
        let (plus, minus) = (potential(FourVector::from(up))?, potential(FourVector::from(down))?);
        for al in 0..4 {
            let d2 = 2.0 * ((plus[al] - a0[al]) / hp - (a0[al] - minus[al]) / hm) / (hp + hm);
            out[al] += ETA[mu][mu] * d2;
        }
    }
    Ok(out)
}
