//! Adaptive Simpson quadrature for vector-valued integrands.
//!
//! The recursion visits subintervals in a fixed order so results are
//! bit-reproducible for identical inputs.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum QuadratureError {
    #[error("adaptive quadrature did not converge on [{a}, {b}] after {evaluations} evaluations")]
    NoConvergence { a: f64, b: f64, evaluations: usize },
    #[error("integrand returned a non-finite value at {at}")]
    NonFinite { at: f64 },
    #[error("invalid tolerance {0}")]
    BadTolerance(f64),
}

const MAX_DEPTH: u32 = 60;
const MAX_EVALUATIONS: usize = 20_000_000;

/// Tolerance pair: the requested accuracy is `max(abs, rel * |integral|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Tolerance { abs: 0.0, rel }
    }
}

struct Simpson<'a, const N: usize, F> {
    f: &'a F,
    target: f64,
    evaluations: usize,
    failure: Option<QuadratureError>,
}

fn max_norm<const N: usize>(v: &[f64; N]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn combine<const N: usize>(a: &[f64; N], b: &[f64; N], c: &[f64; N], h: f64) -> [f64; N] {
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = h / 6.0 * (a[i] + 4.0 * b[i] + c[i]);
    }
    out
}

impl<const N: usize, F> Simpson<'_, N, F>
where
    F: Fn(f64) -> [f64; N],
{
    fn eval(&mut self, x: f64) -> [f64; N] {
        self.evaluations += 1;
        let v = (self.f)(x);
        if v.iter().any(|c| !c.is_finite()) && self.failure.is_none() {
            self.failure = Some(QuadratureError::NonFinite { at: x });
        }
        v
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        &mut self,
        a: f64,
        b: f64,
        fa: [f64; N],
        fm: [f64; N],
        fb: [f64; N],
        whole: [f64; N],
        tol: f64,
        depth: u32,
    ) -> [f64; N] {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let flm = self.eval(lm);
        let frm = self.eval(rm);
        let left = combine(&fa, &flm, &fm, m - a);
        let right = combine(&fm, &frm, &fb, b - m);
        let mut sum = [0.0; N];
        let mut delta = [0.0; N];
        for i in 0..N {
            sum[i] = left[i] + right[i];
            delta[i] = sum[i] - whole[i];
        }
        let err = max_norm(&delta);
        if self.failure.is_some() {
            return sum;
        }
        if err <= 15.0 * tol || !(m > a && b > m) {
            for i in 0..N {
                sum[i] += delta[i] / 15.0;
            }
            return sum;
        }
        if depth >= MAX_DEPTH || self.evaluations >= MAX_EVALUATIONS {
            self.failure = Some(QuadratureError::NoConvergence {
                a,
                b,
                evaluations: self.evaluations,
            });
            return sum;
        }
        let l = self.recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1);
        let r = self.recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = l[i] + r[i];
        }
        out
    }
}

/// Integrates `f` over `[a, b]` componentwise.
///
/// The error target is set once from a coarse estimate of the integral's
/// magnitude (the max-norm of a 33-point Simpson sum of `|f|`), so integrands
/// whose components cancel to zero still converge.
pub fn integrate<const N: usize, F>(
    f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<[f64; N], QuadratureError>
where
    F: Fn(f64) -> [f64; N],
{
    if !(tol.abs >= 0.0 && tol.rel >= 0.0) || tol.abs + tol.rel <= 0.0 {
        return Err(QuadratureError::BadTolerance(tol.abs.max(tol.rel)));
    }
    if a == b {
        return Ok([0.0; N]);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut state = Simpson { f: &f, target: 0.0, evaluations: 0, failure: None };

    const PANELS: usize = 32;
    let h = (hi - lo) / PANELS as f64;
    let nodes: Vec<[f64; N]> = (0..=PANELS)
        .map(|k| state.eval(if k == PANELS { hi } else { lo + h * k as f64 }))
        .collect();
    let mut magnitude = [0.0; N];
    for k in (0..PANELS).step_by(2) {
        for i in 0..N {
            magnitude[i] += h / 3.0
                * (nodes[k][i].abs() + 4.0 * nodes[k + 1][i].abs() + nodes[k + 2][i].abs());
        }
    }
    state.target = tol.abs.max(tol.rel * max_norm(&magnitude));
    if let Some(err) = state.failure {
        return Err(err);
    }

    // Adaptive refinement over the 16 double panels of the coarse pass.
    let mut total = [0.0; N];
    let panel_tol = state.target / (PANELS / 2) as f64;
    for k in (0..PANELS).step_by(2) {
        let (pa, pb) = (lo + h * k as f64, if k + 2 == PANELS { hi } else { lo + h * (k + 2) as f64 });
        let whole = combine(&nodes[k], &nodes[k + 1], &nodes[k + 2], pb - pa);
        let part = state.recurse(pa, pb, nodes[k], nodes[k + 1], nodes[k + 2], whole, panel_tol, 0);
        if let Some(err) = state.failure {
            return Err(err);
        }
        for i in 0..N {
            total[i] += part[i];
        }
    }
    Ok(total.map(|v| sign * v))
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    integrate(|x| [f(x)], a, b, tol).map(|[v]| v)
}

/// Composite trapezoid rule on a periodic interval, exact for trigonometric
/// polynomials of degree below `n`.
pub fn periodic_trapezoid<const N: usize, F>(f: F, period: f64, n: usize) -> [f64; N]
where
    F: Fn(f64) -> [f64; N],
{
    let h = period / n as f64;
    let mut out = [0.0; N];
    for k in 0..n {
        let v = f(h * k as f64);
        for i in 0..N {
            out[i] += v[i];
        }
    }
    out.map(|v| v * h)
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// from Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Nodes and weights of a composite Gauss-Legendre rule over the panels
/// `edges[j]..edges[j + 1]`.
pub fn composite_gauss(edges: &[f64], order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let mut out = Vec::with_capacity(order * edges.len().saturating_sub(1));
    for pair in edges.windows(2) {
        let (mid, half) = (0.5 * (pair[0] + pair[1]), 0.5 * (pair[1] - pair[0]));
        out.extend(x.iter().zip(&w).map(|(&xi, &wi)| (mid + half * xi, half * wi)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate_scalar(|x| x * x * x - 2.0 * x, 0.0, 2.0, Tolerance::relative(1e-12)).unwrap();
        assert!((v - 0.0).abs() < 1e-13);
        let v = integrate_scalar(|x| x * x, -1.0, 2.0, Tolerance::relative(1e-12)).unwrap();
        assert!((v - 3.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let f = |x: f64| x.exp();
        let a = integrate_scalar(f, 0.0, 1.0, Tolerance::relative(1e-12)).unwrap();
        let b = integrate_scalar(f, 1.0, 0.0, Tolerance::relative(1e-12)).unwrap();
        assert_eq!(a, -b);
        assert!((a - (1f64.exp() - 1.0)).abs() < 1e-11);
    }

    #[test]
    fn cancelling_components_converge() {
        let v = integrate(|x| [x.sin(), x.cos(), 1.0], 0.0, 2.0 * PI, Tolerance::relative(1e-10)).unwrap();
        assert!(v[0].abs() < 1e-9 && v[1].abs() < 1e-9);
        assert!((v[2] - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn steep_integrand() {
        let exact = 1.0 / (2.0 * 1e-4) - 0.5;
        let v = integrate_scalar(|x| x.powi(-3), 0.01, 1.0, Tolerance::relative(1e-10)).unwrap();
        assert!(((v - exact) / exact).abs() < 1e-9);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let r = integrate_scalar(|x| 1.0 / x, 0.0, 1.0, Tolerance::relative(1e-8));
        assert!(matches!(r, Err(QuadratureError::NonFinite { .. })));
    }

    #[test]
    fn singular_integrand_fails_to_converge() {
        let r = integrate_scalar(|x| 1.0 / x, 1e-300, 1.0, Tolerance::relative(1e-12));
        assert!(r.is_err());
    }

    #[test]
    fn bad_tolerance() {
        assert!(integrate_scalar(|x| x, 0.0, 1.0, Tolerance { abs: 0.0, rel: 0.0 }).is_err());
        assert!(integrate_scalar(|x| x, 0.0, 1.0, Tolerance { abs: f64::NAN, rel: 1e-3 }).is_err());
    }

    #[test]
    fn gauss_legendre_known_rules() {
        let (x, w) = gauss_legendre(2);
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15 && (w[0] - 1.0).abs() < 1e-15);
        let (x, w) = gauss_legendre(3);
        assert!(x[1].abs() < 1e-16 && (w[1] - 8.0 / 9.0).abs() < 1e-15);
        assert!((x[2] - 0.6f64.sqrt()).abs() < 1e-15);
        let (x, w) = gauss_legendre(1);
        assert_eq!((x[0], w[0]), (0.0, 2.0));
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree_2n_minus_1() {
        for n in [4, 16, 24] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for deg in 0..2 * n {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - want).abs() < 1e-13, "n {n} deg {deg}");
            }
        }
    }

    #[test]
    fn composite_gauss_exponential() {
        let rule = composite_gauss(&[0.0, 0.5, 1.0, 2.0], 8);
        let v: f64 = rule.iter().map(|(x, w)| w * x.exp()).sum();
        assert!((v - (2f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_exact_for_trig() {
        let v = periodic_trapezoid(|p| [p.cos().powi(2), p.sin()], 2.0 * PI, 8);
        assert!((v[0] - PI).abs() < 1e-14);
        assert!(v[1].abs() < 1e-14);
    }
}
