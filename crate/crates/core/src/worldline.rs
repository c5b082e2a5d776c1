//! Lightlike worldlines parametrized by lab time.
//!
//! A worldline reports position, unit velocity and acceleration at lab time
//! `t`; the four-velocity is `(1, v)` and the four-acceleration `(0, a)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::minkowski::{FourVector, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldlineError {
    #[error("direction must be a non-zero finite vector")]
    BadDirection,
    #[error("invalid worldline parameter: {0}")]
    BadParameter(String),
    #[error("sampled worldline needs at least 4 rows, got {0}")]
    TooFewRows(usize),
    #[error("sample times must be strictly increasing (row {row})")]
    NotIncreasing { row: usize },
    #[error("malformed worldline CSV at line {line}: {reason}")]
    Csv { line: usize, reason: String },
}

/// Kinematic state at one lab time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldlinePoint {
    pub t: f64,
    pub position: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
}

impl WorldlinePoint {
    pub fn event(&self) -> FourVector {
        FourVector::from_parts(self.t, self.position)
    }

    pub fn four_velocity(&self) -> FourVector {
        FourVector::from_parts(1.0, self.velocity)
    }

    pub fn four_acceleration(&self) -> FourVector {
        FourVector::from_parts(0.0, self.acceleration)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WorldlineKind {
    AnalyticCatalog,
    SampledWithInterpolation,
}

/// Evaluator for a lightlike trajectory. Implementations must be reentrant.
pub trait NullWorldline: Send + Sync {
    /// Closed lab-time interval `[t_min, t_max]` on which the evaluator is valid.
    fn domain(&self) -> (f64, f64);

    fn point(&self, t: f64) -> WorldlinePoint;

    fn kind(&self) -> WorldlineKind;
}

/// Straight null line `z(t) = origin + (t - t0) n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Straight {
    pub origin: Vec3,
    pub t0: f64,
    pub direction: Vec3,
    pub domain: (f64, f64),
}

impl Straight {
    pub fn new(origin: Vec3, t0: f64, direction: Vec3, domain: (f64, f64)) -> Result<Self, WorldlineError> {
        let direction = direction.normalized().ok_or(WorldlineError::BadDirection)?;
        check_domain(domain)?;
        Ok(Straight { origin, t0, direction, domain })
    }

    /// Motion along +z through the origin at `t = 0`.
    pub fn along_z(domain: (f64, f64)) -> Self {
        Straight { origin: Vec3::ZERO, t0: 0.0, direction: Vec3::Z, domain }
    }
}

impl NullWorldline for Straight {
    fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn point(&self, t: f64) -> WorldlinePoint {
        WorldlinePoint {
            t,
            position: self.origin + self.direction * (t - self.t0),
            velocity: self.direction,
            acceleration: Vec3::ZERO,
        }
    }

    fn kind(&self) -> WorldlineKind {
        WorldlineKind::AnalyticCatalog
    }
}

/// Helical null line about the z-axis,
/// `z(t) = center + (rho cos(w t + phase), rho sin(w t + phase), vz t)` with
/// `rho^2 w^2 + vz^2 = 1`. `vz = 0` gives the planar circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Helix {
    pub center: Vec3,
    pub radius: f64,
    pub omega: f64,
    pub vz: f64,
    pub phase: f64,
    pub domain: (f64, f64),
}

impl Helix {
    /// Unit-speed circle of angular frequency `omega` (radius `1/|omega|`).
    pub fn circle(omega: f64, domain: (f64, f64)) -> Result<Self, WorldlineError> {
        Helix::new(Vec3::ZERO, omega, 0.0, 0.0, domain)
    }

    /// Helix with axial speed `vz`, |vz| < 1; the radius follows from unit speed.
    pub fn new(center: Vec3, omega: f64, vz: f64, phase: f64, domain: (f64, f64)) -> Result<Self, WorldlineError> {
        if !(omega.is_finite() && omega != 0.0) {
            return Err(WorldlineError::BadParameter(format!("omega = {omega}")));
        }
        if !(vz.abs() < 1.0) {
            return Err(WorldlineError::BadParameter(format!("vz = {vz}")));
        }
        check_domain(domain)?;
        let radius = (1.0 - vz * vz).sqrt() / omega.abs();
        Ok(Helix { center, radius, omega, vz, phase, domain })
    }

    /// One full revolution.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega.abs()
    }
}

impl NullWorldline for Helix {
    fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn point(&self, t: f64) -> WorldlinePoint {
        let (s, c) = (self.omega * t + self.phase).sin_cos();
        let (r, w) = (self.radius, self.omega);
        WorldlinePoint {
            t,
            position: self.center + Vec3::new(r * c, r * s, self.vz * t),
            velocity: Vec3::new(-r * w * s, r * w * c, self.vz),
            acceleration: Vec3::new(-r * w * w * c, -r * w * w * s, 0.0),
        }
    }

    fn kind(&self) -> WorldlineKind {
        WorldlineKind::AnalyticCatalog
    }
}

/// Worldline interpolated from position samples with cubic Hermite segments.
///
/// Node tangents are three-point finite differences (one-sided at the ends).
/// The reported velocity is the normalized Hermite derivative and the
/// acceleration is the exact derivative of that unit vector, so `|v| = 1` and
/// `a.v = 0` hold at every evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampled {
    times: Vec<f64>,
    positions: Vec<Vec3>,
    tangents: Vec<Vec3>,
}

impl Sampled {
    pub fn new(times: Vec<f64>, positions: Vec<Vec3>) -> Result<Self, WorldlineError> {
        let n = times.len();
        if n < 4 || positions.len() != n {
            return Err(WorldlineError::TooFewRows(n.min(positions.len())));
        }
        for (row, w) in times.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(WorldlineError::NotIncreasing { row: row + 1 });
            }
        }
        let tangents = (0..n).map(|i| node_tangent(&times, &positions, i)).collect();
        Ok(Sampled { times, positions, tangents })
    }

    /// Parses the `t,zx,zy,zz` CSV format.
    pub fn from_csv(text: &str) -> Result<Self, WorldlineError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(WorldlineError::TooFewRows(0))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["t", "zx", "zy", "zz"] {
            return Err(WorldlineError::Csv {
                line: 1,
                reason: format!("expected header t,zx,zy,zz, got {header:?}"),
            });
        }
        let mut times = Vec::new();
        let mut positions = Vec::new();
        for (idx, line) in lines {
            let vals: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| WorldlineError::Csv { line: idx + 1, reason: e.to_string() })?;
            if vals.len() != 4 || vals.iter().any(|v| !v.is_finite()) {
                return Err(WorldlineError::Csv {
                    line: idx + 1,
                    reason: "expected 4 finite values".into(),
                });
            }
            times.push(vals[0]);
            positions.push(Vec3::new(vals[1], vals[2], vals[3]));
        }
        Sampled::new(times, positions)
    }

    /// Samples another worldline at `n` evenly spaced times.
    pub fn from_worldline(w: &dyn NullWorldline, n: usize) -> Result<Self, WorldlineError> {
        let (a, b) = w.domain();
        let times: Vec<f64> = (0..n).map(|k| a + (b - a) * k as f64 / (n - 1).max(1) as f64).collect();
        let positions = times.iter().map(|&t| w.point(t).position).collect();
        Sampled::new(times, positions)
    }

    fn segment(&self, t: f64) -> usize {
        let idx = self.times.partition_point(|&x| x <= t);
        idx.clamp(1, self.times.len() - 1) - 1
    }
}

fn node_tangent(times: &[f64], pos: &[Vec3], i: usize) -> Vec3 {
    let n = times.len();
    // second-order three-point formulas on a non-uniform grid
    let (i0, i1, i2) = if i == 0 {
        (0, 1, 2)
    } else if i == n - 1 {
        (n - 3, n - 2, n - 1)
    } else {
        (i - 1, i, i + 1)
    };
    let (t0, t1, t2) = (times[i0], times[i1], times[i2]);
    let t = times[i];
    let l0 = (2.0 * t - t1 - t2) / ((t0 - t1) * (t0 - t2));
    let l1 = (2.0 * t - t0 - t2) / ((t1 - t0) * (t1 - t2));
    let l2 = (2.0 * t - t0 - t1) / ((t2 - t0) * (t2 - t1));
    pos[i0] * l0 + pos[i1] * l1 + pos[i2] * l2
}

impl NullWorldline for Sampled {
    fn domain(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    fn point(&self, t: f64) -> WorldlinePoint {
        let k = self.segment(t);
        let (ta, tb) = (self.times[k], self.times[k + 1]);
        let h = tb - ta;
        let u = (t - ta) / h;
        let (p0, p1) = (self.positions[k], self.positions[k + 1]);
        let (m0, m1) = (self.tangents[k] * h, self.tangents[k + 1] * h);

        let u2 = u * u;
        let u3 = u2 * u;
        let position = p0 * (2.0 * u3 - 3.0 * u2 + 1.0)
            + m0 * (u3 - 2.0 * u2 + u)
            + p1 * (-2.0 * u3 + 3.0 * u2)
            + m1 * (u3 - u2);
        let d1 = (p0 * (6.0 * u2 - 6.0 * u) + m0 * (3.0 * u2 - 4.0 * u + 1.0) + p1 * (-6.0 * u2 + 6.0 * u)
            + m1 * (3.0 * u2 - 2.0 * u))
            / h;
        let d2 = (p0 * (12.0 * u - 6.0) + m0 * (6.0 * u - 4.0) + p1 * (-12.0 * u + 6.0) + m1 * (6.0 * u - 2.0))
            / (h * h);

        let speed = d1.norm();
        let velocity = d1 / speed;
        let acceleration = (d2 - velocity * d2.dot(velocity)) / speed;
        WorldlinePoint { t, position, velocity, acceleration }
    }

    fn kind(&self) -> WorldlineKind {
        WorldlineKind::SampledWithInterpolation
    }
}

fn check_domain(domain: (f64, f64)) -> Result<(), WorldlineError> {
    if domain.0.is_finite() && domain.1.is_finite() && domain.0 < domain.1 {
        Ok(())
    } else {
        Err(WorldlineError::BadParameter(format!("domain {domain:?}")))
    }
}

/// Serializable description of a catalog worldline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "catalog", rename_all = "snake_case", deny_unknown_fields)]
pub enum WorldlineSpec {
    Straight {
        #[serde(default)]
        origin: Vec3,
        #[serde(default = "default_z")]
        direction: Vec3,
        t_min: f64,
        t_max: f64,
    },
    Circular {
        omega: f64,
        t_min: f64,
        t_max: f64,
    },
    Helix {
        #[serde(default)]
        center: Vec3,
        omega: f64,
        vz: f64,
        #[serde(default)]
        phase: f64,
        t_min: f64,
        t_max: f64,
    },
}

fn default_z() -> Vec3 {
    Vec3::Z
}

impl WorldlineSpec {
    pub fn build(&self) -> Result<Box<dyn NullWorldline>, WorldlineError> {
        Ok(match *self {
            WorldlineSpec::Straight { origin, direction, t_min, t_max } => {
                Box::new(Straight::new(origin, 0.0, direction, (t_min, t_max))?)
            }
            WorldlineSpec::Circular { omega, t_min, t_max } => Box::new(Helix::circle(omega, (t_min, t_max))?),
            WorldlineSpec::Helix { center, omega, vz, phase, t_min, t_max } => {
                Box::new(Helix::new(center, omega, vz, phase, (t_min, t_max))?)
            }
        })
    }
}
