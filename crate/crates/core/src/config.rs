//! Run configuration: one flat JSON file drives simulation, verification,
//! sampling, and reporting. Every field has a validated default except the
//! seed. The canonical digest of a configuration is recorded in every
//! artifact so outputs can be traced back to their inputs.

use crate::domain::{LevelSetDomain, Profile};
use crate::engine::{Clock, Scheme, SimConfig, StartLaw};
use crate::error::{Error, Result};
use crate::quadrature::{QuadratureRule, DEFAULT_NODES};
use crate::space::{GaussianSpace, Vector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Spectrum specification: explicit eigenvalue list or parametric decay
/// `lambda_k = c k^{-p}` for `k = 1..=d`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceSpec {
    Explicit { lambdas: Vec<f64> },
    Decay { decay: DecaySpec },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecaySpec {
    pub c: f64,
    pub p: f64,
    pub d: usize,
}

impl Default for SpaceSpec {
    fn default() -> Self {
        SpaceSpec::Explicit {
            lambdas: vec![1.0],
        }
    }
}

impl SpaceSpec {
    pub fn build(&self) -> Result<GaussianSpace> {
        match self {
            SpaceSpec::Explicit { lambdas } => GaussianSpace::new(lambdas.clone())
                .map_err(|e| Error::InvalidConfig(format!("space.lambdas: {e}"))),
            SpaceSpec::Decay { decay } => GaussianSpace::power_decay(decay.c, decay.p, decay.d)
                .map_err(|e| Error::InvalidConfig(format!("space.decay: {e}"))),
        }
    }
}

/// Graph profile: `params` is `[c]` for constant, `[c, a_1..a_m]` for
/// linear, `[c, a_1..a_m, b_1..b_m]` for diagonal quadratic, with
/// `m = d - 1` complementary coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    #[serde(default)]
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Constant,
    Linear,
    Quadratic,
}

impl ProfileSpec {
    pub fn build(&self, perp_dims: usize) -> Result<Profile> {
        let p = &self.params;
        match self.kind {
            ProfileKind::Constant => {
                if p.len() != 1 {
                    return Err(Error::InvalidConfig(format!(
                        "domain.profile.params: constant profile takes 1 parameter, got {}",
                        p.len()
                    )));
                }
                Ok(Profile::Constant { c: p[0] })
            }
            ProfileKind::Linear => {
                if p.len() != 1 + perp_dims {
                    return Err(Error::InvalidConfig(format!(
                        "domain.profile.params: linear profile takes {} parameters, got {}",
                        1 + perp_dims,
                        p.len()
                    )));
                }
                Ok(Profile::Linear {
                    c: p[0],
                    slopes: p[1..].to_vec(),
                })
            }
            ProfileKind::Quadratic => {
                if p.len() != 1 + 2 * perp_dims {
                    return Err(Error::InvalidConfig(format!(
                        "domain.profile.params: quadratic profile takes {} parameters, got {}",
                        1 + 2 * perp_dims,
                        p.len()
                    )));
                }
                Ok(Profile::Quadratic {
                    c: p[0],
                    slopes: p[1..1 + perp_dims].to_vec(),
                    curvatures: p[1 + perp_dims..].to_vec(),
                })
            }
        }
    }
}

/// Domain specification. `axis` is one-based, matching the basis index
/// `v_axis` of the graph direction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainSpec {
    Ball { r: f64 },
    Graph { axis: usize, profile: ProfileSpec },
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec::Ball { r: 1.0 }
    }
}

impl DomainSpec {
    pub fn build(&self, dim: usize) -> Result<LevelSetDomain> {
        match self {
            DomainSpec::Ball { r } => LevelSetDomain::ball(*r)
                .map_err(|e| Error::InvalidConfig(format!("domain.r: {e}"))),
            DomainSpec::Graph { axis, profile } => {
                if *axis == 0 || *axis > dim {
                    return Err(Error::InvalidConfig(format!(
                        "domain.axis: must lie in 1..={dim}, got {axis}"
                    )));
                }
                Ok(LevelSetDomain::graph_region(
                    axis - 1,
                    profile.build(dim - 1)?,
                ))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StartSpec {
    Stationary,
    Point { coords: Vec<f64> },
}

impl Default for StartSpec {
    fn default() -> Self {
        StartSpec::Stationary
    }
}

impl StartSpec {
    pub fn build(&self, dim: usize) -> Result<StartLaw> {
        match self {
            StartSpec::Stationary => Ok(StartLaw::StationaryRejection),
            StartSpec::Point { coords } => {
                if coords.len() != dim {
                    return Err(Error::InvalidConfig(format!(
                        "sim.start.coords: expected {dim} coordinates, got {}",
                        coords.len()
                    )));
                }
                Ok(StartLaw::Point(Vector::new(coords.clone())))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimSpec {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub clock: Clock,
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_max_newton_iters")]
    pub max_newton_iters: usize,
    #[serde(default)]
    pub start: StartSpec,
}

fn default_dt() -> f64 {
    1e-3
}
fn default_horizon() -> f64 {
    5.0
}
fn default_paths() -> usize {
    1000
}
fn default_newton_tol() -> f64 {
    1e-10
}
fn default_max_newton_iters() -> usize {
    50
}

impl Default for SimSpec {
    fn default() -> Self {
        Self {
            dt: default_dt(),
            horizon: default_horizon(),
            scheme: Scheme::default(),
            clock: Clock::default(),
            paths: default_paths(),
            newton_tol: default_newton_tol(),
            max_newton_iters: default_max_newton_iters(),
            start: StartSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadratureSpec {
    #[serde(default = "default_nodes")]
    pub nodes_per_axis: usize,
}

fn default_nodes() -> usize {
    DEFAULT_NODES
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes_per_axis: default_nodes(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputSpec {
    #[serde(default = "default_out_dir")]
    pub dir: String,
    /// Cap on the number of per-path CSV files written by `simulate`.
    #[serde(default = "default_csv_paths")]
    pub csv_paths: usize,
}

fn default_out_dir() -> String {
    "out".into()
}
fn default_csv_paths() -> usize {
    8
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
            csv_paths: default_csv_paths(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifySpec {
    /// Oracle sample count for distribution tests.
    #[serde(default = "default_oracle_samples")]
    pub oracle_samples: usize,
}

fn default_oracle_samples() -> usize {
    100_000
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self {
            oracle_samples: default_oracle_samples(),
        }
    }
}

/// The single configuration file. Only `seed` is mandatory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default)]
    pub space: SpaceSpec,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default)]
    pub sim: SimSpec,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub verify: VerifySpec,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::InvalidConfig(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let space = self.space.build()?;
        self.domain.build(space.dim())?;
        self.sim_config()
            .validate()
            .map_err(|e| Error::InvalidConfig(format!("sim: {e}")))?;
        match &self.sim.start {
            StartSpec::Point { coords } => {
                if coords.len() != space.dim() {
                    return Err(Error::InvalidConfig(format!(
                        "sim.start.coords: expected {} coordinates, got {}",
                        space.dim(),
                        coords.len()
                    )));
                }
            }
            StartSpec::Stationary => {}
        }
        if self.quadrature.nodes_per_axis < crate::quadrature::MIN_NODES {
            return Err(Error::InvalidConfig(format!(
                "quadrature.nodes_per_axis: must be >= {}",
                crate::quadrature::MIN_NODES
            )));
        }
        Ok(())
    }

    pub fn build_space(&self) -> Result<GaussianSpace> {
        self.space.build()
    }

    pub fn build_domain(&self) -> Result<LevelSetDomain> {
        let space = self.space.build()?;
        self.domain.build(space.dim())
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            dt: self.sim.dt,
            horizon: self.sim.horizon,
            scheme: self.sim.scheme,
            clock: self.sim.clock,
            seed: self.seed,
            newton_tol: self.sim.newton_tol,
            max_newton_iters: self.sim.max_newton_iters,
            paths: self.sim.paths,
        }
    }

    pub fn start_law(&self) -> Result<StartLaw> {
        let space = self.space.build()?;
        self.sim.start.build(space.dim())
    }

    pub fn volume_rule(&self) -> Result<QuadratureRule> {
        let space = self.space.build()?;
        let domain = self.domain.build(space.dim())?;
        QuadratureRule::for_domain(&domain, space.dim(), self.quadrature.nodes_per_axis)
    }

    /// Stable digest of the canonicalized configuration (sorted-key JSON,
    /// SHA-256, first 16 hex digits).
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = serde_json::to_string(&value).expect("value serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        let mut hex = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_applies_defaults() {
        let cfg = RunConfig::from_json(r#"{"seed": 7}"#).unwrap();
        assert_eq!(cfg.sim.dt, 1e-3);
        assert_eq!(cfg.quadrature.nodes_per_axis, DEFAULT_NODES);
        assert!(matches!(cfg.domain, DomainSpec::Ball { .. }));
        let space = cfg.build_space().unwrap();
        assert_eq!(space.dim(), 1);
    }

    #[test]
    fn seed_is_required() {
        assert!(RunConfig::from_json("{}").is_err());
    }

    #[test]
    fn invalid_dt_names_the_field() {
        let err = RunConfig::from_json(r#"{"seed": 1, "sim": {"dt": -0.5}}"#)
            .err()
            .expect("must fail");
        let msg = err.to_string();
        assert!(msg.contains("dt"), "diagnostic should name dt: {msg}");
    }

    #[test]
    fn graph_domain_round_trip() {
        let cfg = RunConfig::from_json(
            r#"{
                "seed": 3,
                "space": {"lambdas": [1.0, 0.5, 0.25]},
                "domain": {"kind": "graph", "axis": 1,
                           "profile": {"kind": "quadratic",
                                       "params": [0.3, 0.1, -0.2, 0.15, 0.2]}}
            }"#,
        )
        .unwrap();
        let dom = cfg.build_domain().unwrap();
        assert!(matches!(dom, LevelSetDomain::GraphRegion { axis: 0, .. }));
    }

    #[test]
    fn decay_spectrum() {
        let cfg = RunConfig::from_json(
            r#"{"seed": 5, "space": {"decay": {"c": 1.0, "p": 2.0, "d": 4}}}"#,
        )
        .unwrap();
        let space = cfg.build_space().unwrap();
        assert_eq!(space.dim(), 4);
        assert!((space.lambdas()[3] - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = RunConfig::from_json(r#"{"seed": 7}"#).unwrap();
        let b = RunConfig::from_json(r#"{"seed": 7}"#).unwrap();
        let c = RunConfig::from_json(r#"{"seed": 8}"#).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn profile_arity_is_validated() {
        let bad = RunConfig::from_json(
            r#"{
                "seed": 3,
                "space": {"lambdas": [1.0, 0.5]},
                "domain": {"kind": "graph", "axis": 1,
                           "profile": {"kind": "linear", "params": [0.3]}}
            }"#,
        );
        assert!(bad.is_err());
    }
}
