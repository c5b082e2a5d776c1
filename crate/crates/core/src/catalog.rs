//! External field configurations: plane waves, uniform and crossed fields,
//! and a rotating point-dipole snapshot used as a pulsar-magnetosphere toy.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::minkowski::{FieldEB, FourVector, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("dipole field evaluated inside the core (|x| = {radius} < r_core = {r_core})")]
    DipoleCoreViolation { radius: f64, r_core: f64 },
    #[error("invalid field parameter: {0}")]
    BadParameter(String),
}

/// A field function of the spacetime point. Implementations must be pure and
/// reentrant.
pub trait ExternalField: Send + Sync {
    fn eval(&self, x: FourVector) -> Result<FieldEB, FieldError>;
}

impl<F> ExternalField for F
where
    F: Fn(FourVector) -> Result<FieldEB, FieldError> + Send + Sync,
{
    fn eval(&self, x: FourVector) -> Result<FieldEB, FieldError> {
        self(x)
    }
}

/// One linearly polarized wave travelling along +z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveComponent {
    pub amplitude: f64,
    pub omega: f64,
    #[serde(default)]
    pub phase: f64,
    /// Angle of the electric vector from the x-axis in the xy-plane.
    #[serde(default)]
    pub polarization: f64,
}

impl WaveComponent {
    fn eval(&self, x: FourVector) -> FieldEB {
        let c = self.amplitude * (self.omega * (x.t - x.z) + self.phase).cos();
        let (sa, ca) = self.polarization.sin_cos();
        let e = Vec3::new(c * ca, c * sa, 0.0);
        // B = z x E, so E_x = B_y and E_y = -B_x
        FieldEB { e, b: Vec3::new(-e.y, e.x, 0.0) }
    }
}

fn default_length_scale() -> f64 {
    1.0
}

/// Serializable field description, `{"kind": ..., "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", deny_unknown_fields)]
pub enum FieldSpec {
    /// `E = (E0 cos(w (t - z)), 0, 0)`, `B = (0, E0 cos(w (t - z)), 0)`.
    PlaneWave {
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Superposition of waves co-propagating along +z.
    PlaneWaves { waves: Vec<WaveComponent> },
    UniformE { e: Vec3 },
    UniformB { b: Vec3 },
    /// Uniform `E` and `B`; not required to be orthogonal.
    CrossedEB { e: Vec3, b: Vec3 },
    /// Point dipole `m` rotating about z at `omega_star`, frozen at
    /// `t_snap`, with the corotation electric field `E = -(Omega x x) x B`.
    RotatingDipole {
        moment: Vec3,
        omega_star: f64,
        #[serde(default)]
        t_snap: f64,
        #[serde(default = "default_length_scale")]
        length_scale: f64,
        #[serde(default)]
        r_core: Option<f64>,
    },
    Zero,
}

/// Default core radius as a fraction of the dipole length scale.
pub const CORE_FRACTION: f64 = 0.05;

/// Field function built from a [`FieldSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogField {
    spec: FieldSpec,
    moment_snapshot: Vec3,
    r_core: f64,
}

impl CatalogField {
    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }
}

fn finite(name: &str, v: f64) -> Result<(), FieldError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(FieldError::BadParameter(format!("{name} must be finite")))
    }
}

fn finite3(name: &str, v: Vec3) -> Result<(), FieldError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(FieldError::BadParameter(format!("{name} must be finite")))
    }
}

/// Validates the field description and returns its field function.
pub fn make_field(spec: FieldSpec) -> Result<CatalogField, FieldError> {
    let mut moment_snapshot = Vec3::ZERO;
    let mut r_core = 0.0;
    match &spec {
        FieldSpec::PlaneWave { amplitude, omega, phase } => {
            finite("amplitude", *amplitude)?;
            finite("omega", *omega)?;
            finite("phase", *phase)?;
        }
        FieldSpec::PlaneWaves { waves } => {
            for w in waves {
                finite("amplitude", w.amplitude)?;
                finite("omega", w.omega)?;
                finite("phase", w.phase)?;
                finite("polarization", w.polarization)?;
            }
        }
        FieldSpec::UniformE { e } => finite3("e", *e)?,
        FieldSpec::UniformB { b } => finite3("b", *b)?,
        FieldSpec::CrossedEB { e, b } => {
            finite3("e", *e)?;
            finite3("b", *b)?;
        }
        FieldSpec::RotatingDipole { moment, omega_star, t_snap, length_scale, r_core: core } => {
            finite3("moment", *moment)?;
            finite("omega_star", *omega_star)?;
            finite("t_snap", *t_snap)?;
            if !(*length_scale > 0.0 && length_scale.is_finite()) {
                return Err(FieldError::BadParameter("length_scale must be positive".into()));
            }
            r_core = core.unwrap_or(CORE_FRACTION * length_scale);
            if !(r_core > 0.0 && r_core.is_finite()) {
                return Err(FieldError::BadParameter("r_core must be positive".into()));
            }
            let (s, c) = (omega_star * t_snap).sin_cos();
            moment_snapshot = Vec3::new(c * moment.x - s * moment.y, s * moment.x + c * moment.y, moment.z);
        }
        FieldSpec::Zero => {}
    }
    Ok(CatalogField { spec, moment_snapshot, r_core })
}

impl ExternalField for CatalogField {
    fn eval(&self, x: FourVector) -> Result<FieldEB, FieldError> {
        Ok(match &self.spec {
            FieldSpec::PlaneWave { amplitude, omega, phase } => {
                WaveComponent { amplitude: *amplitude, omega: *omega, phase: *phase, polarization: 0.0 }.eval(x)
            }
            FieldSpec::PlaneWaves { waves } => waves.iter().fold(FieldEB::ZERO, |acc, w| acc + w.eval(x)),
            FieldSpec::UniformE { e } => FieldEB { e: *e, b: Vec3::ZERO },
            FieldSpec::UniformB { b } => FieldEB { e: Vec3::ZERO, b: *b },
            FieldSpec::CrossedEB { e, b } => FieldEB { e: *e, b: *b },
            FieldSpec::RotatingDipole { omega_star, .. } => {
                let pos = x.space();
                let radius = pos.norm();
                if !(radius >= self.r_core) {
                    return Err(FieldError::DipoleCoreViolation { radius, r_core: self.r_core });
                }
                let n = pos / radius;
                let m = self.moment_snapshot;
                let b = (n * (3.0 * m.dot(n)) - m) / (4.0 * PI * radius.powi(3));
                let corotation = Vec3::new(0.0, 0.0, *omega_star).cross(pos);
                FieldEB { e: -corotation.cross(b), b }
            }
            FieldSpec::Zero => FieldEB::ZERO,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::em_invariants;

    #[test]
    fn plane_wave_phase_zero() {
        let f = make_field(FieldSpec::PlaneWave { amplitude: 2.0, omega: 1.5, phase: 0.0 }).unwrap();
        let eb = f.eval(FourVector::new(0.0, 0.3, -1.0, 0.0)).unwrap();
        assert_eq!(eb.e, Vec3::new(2.0, 0.0, 0.0));
        assert_eq!(eb.b, Vec3::new(0.0, 2.0, 0.0));
    }

    #[test]
    fn plane_wave_relations_everywhere() {
        let f = make_field(FieldSpec::PlaneWaves {
            waves: vec![
                WaveComponent { amplitude: 1.0, omega: 1.0, phase: 0.0, polarization: 0.3 },
                WaveComponent { amplitude: 0.5, omega: 2.7, phase: 1.0, polarization: -1.1 },
            ],
        })
        .unwrap();
        for k in 0..40 {
            let x = FourVector::new(0.1 * k as f64, 0.2, -0.3 * k as f64, 0.07 * k as f64);
            let eb = f.eval(x).unwrap();
            assert_eq!(eb.e.x, eb.b.y);
            assert_eq!(eb.e.y, -eb.b.x);
            assert_eq!((eb.e.z, eb.b.z), (0.0, 0.0));
            let (d, p) = em_invariants(eb);
            assert!(d.abs() < 1e-15 && p.abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_fields() {
        let f = make_field(FieldSpec::UniformB { b: Vec3::Z }).unwrap();
        assert_eq!(f.eval(FourVector::new(3.0, 1.0, 2.0, 3.0)).unwrap(), FieldEB { e: Vec3::ZERO, b: Vec3::Z });
        let f = make_field(FieldSpec::Zero).unwrap();
        assert_eq!(f.eval(FourVector::ZERO).unwrap(), FieldEB::ZERO);
    }

    #[test]
    fn dipole_core_and_corotation() {
        let f = make_field(FieldSpec::RotatingDipole {
            moment: Vec3::Z,
            omega_star: 0.2,
            t_snap: 0.0,
            length_scale: 1.0,
            r_core: None,
        })
        .unwrap();
        assert!(matches!(
            f.eval(FourVector::new(0.0, 0.01, 0.0, 0.0)),
            Err(FieldError::DipoleCoreViolation { .. })
        ));
        let eb = f.eval(FourVector::new(0.0, 1.0, 0.5, 0.2)).unwrap();
        assert!(eb.e.dot(eb.b).abs() < 1e-16);
        // equatorial field of an aligned dipole points along -m
        let eq = f.eval(FourVector::new(0.0, 2.0, 0.0, 0.0)).unwrap();
        assert!((eq.b.z + 1.0 / (4.0 * PI * 8.0)).abs() < 1e-16);
    }

    #[test]
    fn dipole_snapshot_rotates_moment() {
        let spec = |t_snap| FieldSpec::RotatingDipole {
            moment: Vec3::X,
            omega_star: PI / 2.0,
            t_snap,
            length_scale: 1.0,
            r_core: Some(0.1),
        };
        let a = make_field(spec(1.0)).unwrap();
        assert!((a.moment_snapshot - Vec3::Y).max_abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(make_field(FieldSpec::UniformE { e: Vec3::new(f64::NAN, 0.0, 0.0) }).is_err());
        assert!(make_field(FieldSpec::RotatingDipole {
            moment: Vec3::Z,
            omega_star: 1.0,
            t_snap: 0.0,
            length_scale: -1.0,
            r_core: None,
        })
        .is_err());
    }

    #[test]
    fn closures_are_fields() {
        let f = |_: FourVector| Ok(FieldEB { e: Vec3::X, b: Vec3::ZERO });
        assert_eq!(f.eval(FourVector::ZERO).unwrap().e, Vec3::X);
    }
}
