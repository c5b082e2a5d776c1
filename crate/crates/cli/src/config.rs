//! JSON configuration files for each subcommand.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use nullcharge::catalog::{make_field, CatalogField, FieldSpec};
use nullcharge::eigen::DEFAULT_DEG_TOL;
use nullcharge::minkowski::{FieldEB, FourVector, Vec3};
use nullcharge::worldline::{NullWorldline, Sampled, WorldlineSpec};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::CliError;

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

/// Reads and parses a config file; both I/O and schema errors are input errors.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn one() -> f64 {
    1.0
}

fn deg_tol() -> f64 {
    DEFAULT_DEG_TOL
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(input(format!("{name} must be positive and finite, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(input(format!("{name} must be finite")))
    }
}

fn field(spec: &FieldSpec) -> Result<CatalogField, CliError> {
    make_field(spec.clone()).map_err(|e| input(e.to_string()))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenConfig {
    #[serde(rename = "E")]
    pub e: Vec3,
    #[serde(rename = "B")]
    pub b: Vec3,
    #[serde(default = "one")]
    pub q: f64,
    #[serde(default = "deg_tol")]
    pub deg_tol: f64,
}

impl EigenConfig {
    pub fn validate(&self) -> Result<FieldEB, CliError> {
        finite("q", self.q)?;
        positive("deg_tol", self.deg_tol)?;
        FieldEB::new(self.e, self.b).map_err(|e| input(e.to_string()))
    }
}

/// A catalog worldline or a CSV file of samples `t,zx,zy,zz`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum WorldlineSource {
    Catalog(WorldlineSpec),
    Csv { csv: PathBuf },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxConfig {
    pub worldline: WorldlineSource,
    #[serde(default = "one")]
    pub q: f64,
    pub epsilon: Option<f64>,
    /// Observation time; defaults to the end of the worldline domain.
    pub t: Option<f64>,
    #[serde(default = "flux_tol")]
    pub quad_tol: f64,
    /// Extra cutoffs for the small-angle scaling diagnostic.
    #[serde(default)]
    pub eps_sweep: Vec<f64>,
}

fn flux_tol() -> f64 {
    1e-10
}

pub struct FluxPlan {
    pub worldline: Box<dyn NullWorldline>,
    pub q: f64,
    pub epsilon: f64,
    pub t: f64,
    pub quad_tol: f64,
    pub eps_sweep: Vec<f64>,
}

fn cutoff(name: &str, eps: f64) -> Result<(), CliError> {
    if eps > 0.0 && eps <= PI {
        Ok(())
    } else {
        Err(input(format!("{name} must lie in (0, pi], got {eps}")))
    }
}

impl FluxConfig {
    /// `base` resolves relative CSV paths; `eps` overrides the config value.
    pub fn validate(&self, base: &Path, eps: Option<f64>) -> Result<FluxPlan, CliError> {
        finite("q", self.q)?;
        positive("quad_tol", self.quad_tol)?;
        let epsilon = eps.or(self.epsilon).unwrap_or(PI / 2.0);
        cutoff("epsilon", epsilon)?;
        for &e in &self.eps_sweep {
            cutoff("eps_sweep entry", e)?;
        }
        let worldline: Box<dyn NullWorldline> = match &self.worldline {
            WorldlineSource::Catalog(spec) => spec.build().map_err(|e| input(e.to_string()))?,
            WorldlineSource::Csv { csv } => {
                let path = base.join(csv);
                let text = std::fs::read_to_string(&path).map_err(|e| input(format!("{}: {e}", path.display())))?;
                Box::new(Sampled::from_csv(&text).map_err(|e| input(format!("{}: {e}", path.display())))?)
            }
        };
        let (t_min, t_max) = worldline.domain();
        let t = self.t.unwrap_or(t_max);
        if !(t > t_min && t <= t_max) {
            return Err(input(format!("t = {t} outside the worldline domain ({t_min}, {t_max}]")));
        }
        Ok(FluxPlan { worldline, q: self.q, epsilon, t, quad_tol: self.quad_tol, eps_sweep: self.eps_sweep.clone() })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub z: FourVector,
    pub v: Vec3,
    /// Initial multiplier (the frequency of the charge).
    pub e: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagateConfig {
    pub field: FieldSpec,
    #[serde(default = "one")]
    pub q: f64,
    pub initial: InitialState,
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "admis_tol")]
    pub admissibility_tol: f64,
}

fn admis_tol() -> f64 {
    1e-9
}

impl PropagateConfig {
    pub fn validate(&self) -> Result<CatalogField, CliError> {
        finite("q", self.q)?;
        positive("dt", self.dt)?;
        positive("admissibility_tol", self.admissibility_tol)?;
        finite("t_end", self.t_end)?;
        let s = &self.initial;
        if !(s.z.is_finite() && s.v.is_finite() && s.e.is_finite()) {
            return Err(input("initial state must be finite"));
        }
        if s.e == 0.0 {
            return Err(input("initial multiplier e must be non-zero"));
        }
        if (s.v.norm() - 1.0).abs() > 1e-10 {
            return Err(input("initial velocity must be a unit vector"));
        }
        if self.t_end < s.z.t {
            return Err(input("t_end precedes the initial time"));
        }
        let steps = (self.t_end - s.z.t) / self.dt;
        if steps > 1e7 {
            return Err(input(format!("{steps:.0} steps requested; at most 1e7 allowed")));
        }
        field(&self.field)
    }
}

/// `[min, max, n]` with `n` evenly spaced points including both ends.
#[derive(Debug, Clone, Copy, Deserialize)]
pub struct Axis(pub f64, pub f64, pub usize);

impl Axis {
    fn validate(&self, name: &str) -> Result<(), CliError> {
        let Axis(lo, hi, n) = *self;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(input(format!("grid axis {name} must be finite with min <= max")));
        }
        if n == 0 {
            return Err(input(format!("grid axis {name} needs at least one point")));
        }
        if n == 1 && lo != hi {
            return Err(input(format!("grid axis {name} with one point needs min == max")));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let Axis(lo, hi, n) = *self;
        if n == 1 {
            return vec![lo];
        }
        (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub x: Axis,
    pub y: Axis,
    pub z: Axis,
}

impl Grid {
    /// Points in lexicographic `(x, y, z)` order.
    pub fn points(&self) -> Vec<Vec3> {
        let (xs, ys, zs) = (self.x.points(), self.y.points(), self.z.points());
        let mut out = Vec::with_capacity(xs.len() * ys.len() * zs.len());
        for &x in &xs {
            for &y in &ys {
                for &z in &zs {
                    out.push(Vec3::new(x, y, z));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub field: FieldSpec,
    pub grid: Grid,
    #[serde(default)]
    pub t: f64,
    #[serde(default = "one")]
    pub q: f64,
    #[serde(default = "deg_tol")]
    pub deg_tol: f64,
}

impl MapConfig {
    pub fn validate(&self) -> Result<CatalogField, CliError> {
        finite("t", self.t)?;
        finite("q", self.q)?;
        positive("deg_tol", self.deg_tol)?;
        self.grid.x.validate("x")?;
        self.grid.y.validate("y")?;
        self.grid.z.validate("z")?;
        let n = self.grid.x.2 as u128 * self.grid.y.2 as u128 * self.grid.z.2 as u128;
        if n > 10_000_000 {
            return Err(input(format!("grid has {n} points; at most 1e7 allowed")));
        }
        field(&self.field)
    }
}

#[derive(Debug, Clone, Copy, Deserialize, serde::Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConformalTolerances {
    pub omega_identity: f64,
    pub field_round_trip: f64,
    pub eom_invariance: f64,
    pub dilatation_only: f64,
}

impl Default for ConformalTolerances {
    fn default() -> Self {
        ConformalTolerances { omega_identity: 1e-10, field_round_trip: 1e-10, eom_invariance: 1e-9, dilatation_only: 1e-12 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConformalConfig {
    #[serde(default = "samples")]
    pub samples: usize,
    pub seed: Option<u64>,
    #[serde(default = "one")]
    pub q: f64,
    /// Components of `b` are drawn from `[-b_max, b_max]`.
    #[serde(default = "b_max")]
    pub b_max: f64,
    /// Components of `x` are drawn from `[-x_range, x_range]`.
    #[serde(default = "x_range")]
    pub x_range: f64,
    #[serde(default = "one")]
    pub field_range: f64,
    #[serde(default = "one")]
    pub theta_max: f64,
    #[serde(default)]
    pub tolerances: ConformalTolerances,
}

fn samples() -> usize {
    100
}

fn b_max() -> f64 {
    0.1
}

fn x_range() -> f64 {
    2.0
}

impl Default for ConformalConfig {
    fn default() -> Self {
        ConformalConfig {
            samples: samples(),
            seed: None,
            q: 1.0,
            b_max: b_max(),
            x_range: x_range(),
            field_range: 1.0,
            theta_max: 1.0,
            tolerances: ConformalTolerances::default(),
        }
    }
}

impl ConformalConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.samples == 0 || self.samples > 1_000_000 {
            return Err(input("samples must lie in 1..=1000000"));
        }
        finite("q", self.q)?;
        positive("b_max", self.b_max)?;
        positive("x_range", self.x_range)?;
        positive("field_range", self.field_range)?;
        positive("theta_max", self.theta_max)?;
        let t = &self.tolerances;
        positive("tolerances.omega_identity", t.omega_identity)?;
        positive("tolerances.field_round_trip", t.field_round_trip)?;
        positive("tolerances.eom_invariance", t.eom_invariance)?;
        positive("tolerances.dilatation_only", t.dilatation_only)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_points_hit_both_ends() {
        assert_eq!(Axis(-1.0, 1.0, 3).points(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(Axis(0.3, 0.3, 1).points(), vec![0.3]);
        let p = Axis(0.0, 0.7, 8).points();
        assert_eq!(p[7], 0.7);
    }

    #[test]
    fn grid_order_is_lexicographic() {
        let g = Grid { x: Axis(0.0, 1.0, 2), y: Axis(0.0, 1.0, 2), z: Axis(0.0, 1.0, 2) };
        let p = g.points();
        assert_eq!(p[1], Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(p[2], Vec3::new(0.0, 1.0, 0.0));
        assert_eq!(p[4], Vec3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn eigen_config_defaults() {
        let c: EigenConfig = serde_json::from_str(r#"{"E":[0,0,0],"B":[0,0,0]}"#).unwrap();
        assert_eq!(c.q, 1.0);
        assert!(serde_json::from_str::<EigenConfig>(r#"{"E":[0,0,0],"B":[0,0,0],"x":1}"#).is_err());
    }

    #[test]
    fn flux_rejects_bad_cutoff() {
        let c: FluxConfig = serde_json::from_str(
            r#"{"worldline":{"catalog":"circular","omega":1,"t_min":0,"t_max":6},"epsilon":4}"#,
        )
        .unwrap();
        assert!(c.validate(Path::new("."), None).is_err());
        assert!(c.validate(Path::new("."), Some(0.5)).is_ok());
    }
}
