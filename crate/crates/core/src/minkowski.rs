//! Fixed-size Lorentzian algebra under the metric diag(-1, 1, 1, 1), c = 1.
//!
//! Everything here is plain `Copy` data: three-vectors, four-vectors, the
//! antisymmetric field tensor and the rotation that carries the z-axis onto a
//! unit velocity.

use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minkowski metric components, `ETA[mu][nu]`.
pub const ETA: Mat4 = [
    [-1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

/// Row-major 4x4 real matrix.
pub type Mat4 = [[f64; 4]; 4];

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum MinkowskiError {
    #[error("velocity must be a unit vector, |v| = {norm}")]
    NotUnit { norm: f64 },
    #[error("field components must be finite")]
    NonFinite,
}

/// Euclidean three-vector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };
    pub const X: Vec3 = Vec3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: Vec3 = Vec3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 1.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_sqr(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Largest absolute component.
    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    /// Unit vector along `self`; `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self / n)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Spacetime vector with contravariant components `(t, x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct FourVector {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 4]> for FourVector {
    fn from(a: [f64; 4]) -> Self {
        FourVector::new(a[0], a[1], a[2], a[3])
    }
}

impl From<FourVector> for [f64; 4] {
    fn from(v: FourVector) -> Self {
        v.to_array()
    }
}

impl FourVector {
    pub const ZERO: FourVector = FourVector { t: 0.0, x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        FourVector { t, x, y, z }
    }

    pub fn from_parts(t: f64, space: Vec3) -> Self {
        FourVector::new(t, space.x, space.y, space.z)
    }

    pub fn space(self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.t, self.x, self.y, self.z]
    }

    /// Components with the index lowered, `v_mu = eta_{mu nu} v^nu`.
    pub fn lower(self) -> [f64; 4] {
        [-self.t, self.x, self.y, self.z]
    }

    pub fn norm_sqr(self) -> f64 {
        mdot(self, self)
    }

    pub fn max_abs(self) -> f64 {
        self.t.abs().max(self.space().max_abs())
    }

    /// Null test relative to the largest component.
    pub fn is_null(self, tol: f64) -> bool {
        let m = self.max_abs();
        self.norm_sqr().abs() <= tol * m * m
    }

    pub fn is_finite(self) -> bool {
        self.t.is_finite() && self.space().is_finite()
    }
}

impl Index<usize> for FourVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.t,
            1 => &self.x,
            2 => &self.y,
            3 => &self.z,
            _ => panic!("FourVector index {i} out of range"),
        }
    }
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, o: FourVector) -> FourVector {
        FourVector::new(self.t + o.t, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, o: FourVector) -> FourVector {
        FourVector::new(self.t - o.t, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        FourVector::new(-self.t, -self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for FourVector {
    type Output = FourVector;
    fn mul(self, s: f64) -> FourVector {
        FourVector::new(self.t * s, self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<FourVector> for f64 {
    type Output = FourVector;
    fn mul(self, v: FourVector) -> FourVector {
        v * self
    }
}

impl Div<f64> for FourVector {
    type Output = FourVector;
    fn div(self, s: f64) -> FourVector {
        FourVector::new(self.t / s, self.x / s, self.y / s, self.z / s)
    }
}

/// Minkowski inner product `-a0 b0 + a.b`.
pub fn mdot(a: FourVector, b: FourVector) -> f64 {
    -a.t * b.t + a.x * b.x + a.y * b.y + a.z * b.z
}

pub fn mat4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn mat4_transpose(a: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[j][i] = *v;
        }
    }
    out
}

pub fn mat4_apply(a: &Mat4, v: FourVector) -> FourVector {
    let c = v.to_array();
    let row = |i: usize| (0..4).map(|k| a[i][k] * c[k]).sum::<f64>();
    FourVector::new(row(0), row(1), row(2), row(3))
}

/// Largest absolute entry.
pub fn mat4_max_abs(a: &Mat4) -> f64 {
    a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn mat4_frobenius(a: &Mat4) -> f64 {
    a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

/// Outer product `a^mu b^nu - a^nu b^mu`.
pub fn wedge(a: FourVector, b: FourVector) -> Mat4 {
    let (a, b) = (a.to_array(), b.to_array());
    let mut out = [[0.0; 4]; 4];
    for mu in 0..4 {
        for nu in 0..4 {
            out[mu][nu] = a[mu] * b[nu] - a[nu] * b[mu];
        }
    }
    out
}

/// Electric and magnetic field at a point (Heaviside-Lorentz units).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldEB {
    #[serde(rename = "E")]
    pub e: Vec3,
    #[serde(rename = "B")]
    pub b: Vec3,
}

impl FieldEB {
    pub const ZERO: FieldEB = FieldEB { e: Vec3::ZERO, b: Vec3::ZERO };

    /// Checked constructor rejecting NaN and infinite components.
    pub fn new(e: Vec3, b: Vec3) -> Result<Self, MinkowskiError> {
        if e.is_finite() && b.is_finite() {
            Ok(FieldEB { e, b })
        } else {
            Err(MinkowskiError::NonFinite)
        }
    }

    /// Field scale `E^2 + B^2`.
    pub fn scale(&self) -> f64 {
        self.e.norm_sqr() + self.b.norm_sqr()
    }

    pub fn scaled(&self, c: f64) -> FieldEB {
        FieldEB { e: self.e * c, b: self.b * c }
    }
}

impl Add for FieldEB {
    type Output = FieldEB;
    fn add(self, o: FieldEB) -> FieldEB {
        FieldEB { e: self.e + o.e, b: self.b + o.b }
    }
}

/// Antisymmetric electromagnetic field tensor.
///
/// The stored layout is the contravariant `F^{mu nu}` with `F^{0i} = E^i` and
/// `F^{ij} = eps_{ijk} B^k`; with this layout [`lorentz_force`] returns
/// `q (E.v, E + v x B)` for `v = (1, v)`. Accessors expose the covariant and
/// mixed forms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EmTensor {
    upper: Mat4,
}

impl EmTensor {
    pub const ZERO: EmTensor = EmTensor { upper: [[0.0; 4]; 4] };

    /// Builds a tensor from an arbitrary contravariant matrix, keeping only its
    /// antisymmetric part so that `F^{mu nu} = -F^{nu mu}` holds exactly.
    pub fn from_contravariant(m: &Mat4) -> Self {
        let mut upper = [[0.0; 4]; 4];
        for mu in 0..4 {
            for nu in (mu + 1)..4 {
                let v = 0.5 * (m[mu][nu] - m[nu][mu]);
                upper[mu][nu] = v;
                upper[nu][mu] = -v;
            }
        }
        EmTensor { upper }
    }

    /// Builds a tensor from covariant components `F_{mu nu}`.
    pub fn from_covariant(m: &Mat4) -> Self {
        EmTensor::from_contravariant(&lower_both(m))
    }

    pub fn contravariant(&self) -> Mat4 {
        self.upper
    }

    /// `F_{mu nu} = eta F eta` (raising and lowering use the same matrix).
    pub fn covariant(&self) -> Mat4 {
        lower_both(&self.upper)
    }

    /// Mixed components `F^mu_nu = F^{mu rho} eta_{rho nu}`.
    pub fn mixed(&self) -> Mat4 {
        let mut out = self.upper;
        for row in out.iter_mut() {
            row[0] = -row[0];
        }
        out
    }

    pub fn scaled(&self, s: f64) -> EmTensor {
        let mut upper = self.upper;
        upper.iter_mut().flatten().for_each(|v| *v *= s);
        EmTensor { upper }
    }

    pub fn max_abs(&self) -> f64 {
        mat4_max_abs(&self.upper)
    }

    /// Full contraction `F^{kl} F_{kl}` = 2 (B^2 - E^2).
    pub fn contraction(&self) -> f64 {
        let low = self.covariant();
        (0..4)
            .flat_map(|k| (0..4).map(move |l| (k, l)))
            .map(|(k, l)| self.upper[k][l] * low[k][l])
            .sum()
    }

    pub fn to_eb(&self) -> FieldEB {
        let f = &self.upper;
        FieldEB {
            e: Vec3::new(f[0][1], f[0][2], f[0][3]),
            b: Vec3::new(f[2][3], f[3][1], f[1][2]),
        }
    }
}

impl Add for EmTensor {
    type Output = EmTensor;
    fn add(self, o: EmTensor) -> EmTensor {
        let mut upper = self.upper;
        for mu in 0..4 {
            for nu in 0..4 {
                upper[mu][nu] += o.upper[mu][nu];
            }
        }
        EmTensor { upper }
    }
}

fn lower_both(m: &Mat4) -> Mat4 {
    let mut out = *m;
    for (mu, row) in out.iter_mut().enumerate() {
        for (nu, v) in row.iter_mut().enumerate() {
            *v *= ETA[mu][mu] * ETA[nu][nu];
        }
    }
    out
}

pub fn em_tensor_from_eb(f: FieldEB) -> EmTensor {
    let (e, b) = (f.e, f.b);
    let mut upper = [[0.0; 4]; 4];
    let ea = e.to_array();
    for i in 0..3 {
        upper[0][i + 1] = ea[i];
        upper[i + 1][0] = -ea[i];
    }
    upper[1][2] = b.z;
    upper[2][1] = -b.z;
    upper[2][3] = b.x;
    upper[3][2] = -b.x;
    upper[3][1] = b.y;
    upper[1][3] = -b.y;
    EmTensor { upper }
}

/// Field invariants `(B^2 - E^2, E.B)`.
pub fn em_invariants(f: FieldEB) -> (f64, f64) {
    (f.b.norm_sqr() - f.e.norm_sqr(), f.e.dot(f.b))
}

/// `q F^mu_nu v^nu`.
pub fn lorentz_force(q: f64, f: &EmTensor, v: FourVector) -> FourVector {
    mat4_apply(&f.mixed(), v) * q
}

/// Rotation carrying the z-axis onto a unit velocity, with its 4x4 embedding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationToVelocity {
    pub omega: [[f64; 3]; 3],
}

impl RotationToVelocity {
    pub fn apply(&self, n: Vec3) -> Vec3 {
        let w = &self.omega;
        let a = n.to_array();
        let row = |i: usize| w[i][0] * a[0] + w[i][1] * a[1] + w[i][2] * a[2];
        Vec3::new(row(0), row(1), row(2))
    }

    /// Embedding with `Omega_{0 mu} = Omega_{mu 0} = delta_{mu 0}`.
    pub fn embedded(&self) -> Mat4 {
        let mut out = [[0.0; 4]; 4];
        out[0][0] = 1.0;
        for i in 0..3 {
            for j in 0..3 {
                out[i + 1][j + 1] = self.omega[i][j];
            }
        }
        out
    }

    pub fn apply4(&self, n: FourVector) -> FourVector {
        FourVector::from_parts(n.t, self.apply(n.space()))
    }
}

/// Unit-norm tolerance for [`rotation_to_velocity`].
pub const UNIT_TOL: f64 = 1e-9;
const POLE_TOL: f64 = 1e-12;

/// Rotation `R_z(phi_v) R_y(theta_v)` for the polar angles of the unit vector
/// `v`. Within 1e-12 of the poles `phi_v` is taken as zero.
pub fn rotation_to_velocity(v: Vec3) -> Result<RotationToVelocity, MinkowskiError> {
    let norm = v.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
        return Err(MinkowskiError::NotUnit { norm });
    }
    let v = v / norm;
    let rho = v.x.hypot(v.y);
    let (cos_t, sin_t) = (v.z, rho);
    let (cos_p, sin_p) = if rho <= POLE_TOL { (1.0, 0.0) } else { (v.x / rho, v.y / rho) };
    let rz = [[cos_p, -sin_p, 0.0], [sin_p, cos_p, 0.0], [0.0, 0.0, 1.0]];
    let ry = [[cos_t, 0.0, sin_t], [0.0, 1.0, 0.0], [-sin_t, 0.0, cos_t]];
    let mut omega = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            omega[i][j] = (0..3).map(|k| rz[i][k] * ry[k][j]).sum();
        }
    }
    Ok(RotationToVelocity { omega })
}
