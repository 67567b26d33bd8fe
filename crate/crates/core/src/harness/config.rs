//! Experiment configuration, read from TOML.
//!
//! ```toml
//! [world]
//! n = 10
//! d = 5
//! alpha = 0.05
//! sigma = 1.0
//! horizon = 100
//! dynamics = "expected"     # expected | stochastic | fixpoint
//! profiles = "uniform"      # or a path to a u0.csv
//!
//! [catalog]
//! kind = "finite"           # finite | ball
//! m = 100
//!
//! [graph]
//! model = "cmp"             # cmp | er | ba | file
//!
//! [policy]
//! list = ["linrel", "thompson", "regression", "rand"]
//!
//! [run]
//! seeds = "0..20"
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::DEFAULT_LAMBDA;
use crate::policy::linrel::{DEFAULT_BETA_SCALE, DEFAULT_DELTA};
use crate::policy::SampleMode;
use crate::sim::Dynamics;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub world: WorldConfig,
    pub catalog: CatalogConfig,
    pub graph: GraphConfig,
    pub policy: PolicyConfig,
    pub run: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
    pub sigma: f64,
    pub horizon: usize,
    pub dynamics: DynamicsKind,
    pub profiles: ProfileSource,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            n: 10,
            d: 5,
            alpha: 0.05,
            sigma: 1.0,
            horizon: 100,
            dynamics: DynamicsKind::Expected,
            profiles: ProfileSource::Uniform,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DynamicsKind {
    #[default]
    Expected,
    Stochastic,
    Fixpoint,
}

impl From<DynamicsKind> for Dynamics {
    fn from(kind: DynamicsKind) -> Self {
        match kind {
            DynamicsKind::Expected => Dynamics::Expected,
            DynamicsKind::Stochastic => Dynamics::Stochastic,
            DynamicsKind::Fixpoint => Dynamics::Fixpoint,
        }
    }
}

/// `"uniform"` draws `U⁰` from `[0,1]^{n×d}` per seed; anything else is a
/// path to a headerless `n × d` CSV.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ProfileSource {
    #[default]
    Uniform,
    File(PathBuf),
}

impl Serialize for ProfileSource {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ProfileSource::Uniform => s.serialize_str("uniform"),
            ProfileSource::File(p) => s.serialize_str(&p.to_string_lossy()),
        }
    }
}

impl<'de> Deserialize<'de> for ProfileSource {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(if s == "uniform" {
            ProfileSource::Uniform
        } else {
            ProfileSource::File(PathBuf::from(s))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CatalogConfig {
    pub kind: CatalogKind,
    /// Number of items for a generated finite catalog.
    pub m: usize,
    /// Optional item CSV; overrides `m`.
    pub file: Option<PathBuf>,
}

impl Default for CatalogConfig {
    fn default() -> Self {
        Self {
            kind: CatalogKind::Finite,
            m: 100,
            file: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CatalogKind {
    #[default]
    Finite,
    Ball,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub model: GraphModel,
    /// Edge-list (`src,dst,weight`) or dense matrix CSV for `model = "file"`.
    pub path: Option<PathBuf>,
    pub teleport: f64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            model: GraphModel::Cmp,
            path: None,
            teleport: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GraphModel {
    #[default]
    Cmp,
    Er,
    Ba,
    File,
}

impl FromStr for GraphModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cmp" => Ok(Self::Cmp),
            "er" => Ok(Self::Er),
            "ba" => Ok(Self::Ba),
            "file" => Ok(Self::File),
            other => Err(Error::Config(vec![format!("graph.model: unknown model `{other}`")])),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Linrel,
    #[serde(alias = "ts")]
    Thompson,
    ThompsonIncremental,
    Linucb,
    Regression,
    Rand,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::Linrel,
        PolicyKind::Thompson,
        PolicyKind::ThompsonIncremental,
        PolicyKind::Linucb,
        PolicyKind::Regression,
        PolicyKind::Rand,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Linrel => "linrel",
            PolicyKind::Thompson => "thompson",
            PolicyKind::ThompsonIncremental => "thompson-incremental",
            PolicyKind::Linucb => "linucb",
            PolicyKind::Regression => "regression",
            PolicyKind::Rand => "rand",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "ts" {
            return Ok(PolicyKind::Thompson);
        }
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Config(vec![format!("policy.list: unknown policy `{s}`")]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub list: Vec<PolicyKind>,
    pub delta: f64,
    pub beta_scale: f64,
    pub lambda: f64,
    pub linucb_c: f64,
    pub prior_variance: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            list: vec![PolicyKind::Linrel, PolicyKind::Thompson, PolicyKind::Regression, PolicyKind::Rand],
            delta: DEFAULT_DELTA,
            beta_scale: DEFAULT_BETA_SCALE,
            lambda: DEFAULT_LAMBDA,
            linucb_c: 1.0,
            prior_variance: 1.0,
        }
    }
}

impl PolicyKind {
    pub fn sample_mode(self) -> Option<SampleMode> {
        match self {
            PolicyKind::Thompson => Some(SampleMode::Recompute),
            PolicyKind::ThompsonIncremental => Some(SampleMode::Incremental),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seeds: Seeds,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    /// Record per-round wall time. With timing off `wall_ns` is written as 0
    /// and reruns are byte-identical.
    pub timing: bool,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seeds: Seeds((0..20).collect()),
            workers: 0,
            timing: true,
            out: PathBuf::from("results"),
        }
    }
}

/// Seed list, written as `"0..20"`, `"1,4,9"`, or a TOML integer array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seeds(pub Vec<u64>);

impl FromStr for Seeds {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: String| Error::Config(vec![format!("run.seeds: {why}")]);
        let s = s.trim();
        if let Some((lo, hi)) = s.split_once("..") {
            let lo: u64 = lo.trim().parse().map_err(|e| bad(format!("`{lo}`: {e}")))?;
            let hi: u64 = hi.trim().parse().map_err(|e| bad(format!("`{hi}`: {e}")))?;
            return Ok(Seeds((lo..hi).collect()));
        }
        s.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.trim().parse().map_err(|e| bad(format!("`{p}`: {e}"))))
            .collect::<Result<Vec<_>>>()
            .map(Seeds)
    }
}

impl Serialize for Seeds {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Seeds {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            List(Vec<u64>),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::List(v) => Ok(Seeds(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads and validates a config file. Relative paths inside it are
    /// resolved against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut cfg: Self = toml::from_str(&text).map_err(|e| Error::Config(vec![format!("{}: {e}", path.display())]))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let ProfileSource::File(p) = &mut cfg.world.profiles {
            rebase(p);
        }
        if let Some(p) = &mut cfg.catalog.file {
            rebase(p);
        }
        if let Some(p) = &mut cfg.graph.path {
            rebase(p);
        }
        rebase(&mut cfg.run.out);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every field and reports all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let w = &self.world;
        if w.n == 0 {
            errs.push("world.n: must be at least 1".to_string());
        }
        if w.d == 0 {
            errs.push("world.d: must be at least 1".to_string());
        }
        if !(w.alpha > 0.0 && w.alpha <= 1.0) {
            errs.push(format!("world.alpha: {} is outside (0, 1]", w.alpha));
        }
        if !(w.sigma >= 0.0 && w.sigma.is_finite()) {
            errs.push(format!("world.sigma: {} must be finite and nonnegative", w.sigma));
        }
        if w.horizon == 0 {
            errs.push("world.horizon: must be at least 1".to_string());
        }
        match self.catalog.kind {
            CatalogKind::Finite if self.catalog.file.is_none() && self.catalog.m < w.d => errs.push(format!(
                "catalog.m: {} items cannot span dimension {}",
                self.catalog.m, w.d
            )),
            CatalogKind::Ball if self.catalog.file.is_some() => {
                errs.push("catalog.file: only valid for kind = \"finite\"".to_string())
            }
            _ => {}
        }
        let g = &self.graph;
        if !(0.0..1.0).contains(&g.teleport) {
            errs.push(format!("graph.teleport: {} is outside [0, 1)", g.teleport));
        }
        match (g.model, &g.path) {
            (GraphModel::File, None) => errs.push("graph.path: required when model = \"file\"".to_string()),
            (GraphModel::Cmp | GraphModel::Er | GraphModel::Ba, Some(_)) => {
                errs.push("graph.path: only valid for model = \"file\"".to_string())
            }
            _ => {}
        }
        if matches!(g.model, GraphModel::Er | GraphModel::Ba) && w.n < 2 {
            errs.push("world.n: random graph models need at least 2 users".to_string());
        }
        let p = &self.policy;
        if p.list.is_empty() {
            errs.push("policy.list: must name at least one policy".to_string());
        }
        if !(p.delta > 0.0 && p.delta < 1.0) {
            errs.push(format!("policy.delta: {} is outside (0, 1)", p.delta));
        }
        if !(p.beta_scale >= 0.0 && p.beta_scale.is_finite()) {
            errs.push(format!("policy.beta_scale: {} must be finite and nonnegative", p.beta_scale));
        }
        if !(p.lambda > 0.0 && p.lambda.is_finite()) {
            errs.push(format!("policy.lambda: {} must be positive", p.lambda));
        }
        if !(p.linucb_c >= 0.0 && p.linucb_c.is_finite()) {
            errs.push(format!("policy.linucb_c: {} must be finite and nonnegative", p.linucb_c));
        }
        if !(p.prior_variance > 0.0 && p.prior_variance.is_finite()) {
            errs.push(format!("policy.prior_variance: {} must be positive", p.prior_variance));
        }
        if p.list.contains(&PolicyKind::Linucb) && self.catalog.kind == CatalogKind::Finite {
            errs.push("policy.list: linucb requires catalog.kind = \"ball\"".to_string());
        }
        if w.sigma == 0.0 && p.list.iter().any(|k| k.sample_mode().is_some()) {
            errs.push("world.sigma: thompson sampling needs sigma > 0".to_string());
        }
        if self.run.seeds.0.is_empty() {
            errs.push("run.seeds: must contain at least one seed".to_string());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = ExperimentConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!((cfg.world.n, cfg.world.d, cfg.world.horizon), (10, 5, 100));
        assert_eq!(cfg.world.alpha, 0.05);
        assert_eq!(cfg.catalog.m, 100);
        assert_eq!(cfg.run.seeds.0.len(), 20);
    }

    #[test]
    fn parses_sections() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
            [world]
            n = 4
            alpha = 0.1
            dynamics = "fixpoint"
            [catalog]
            kind = "ball"
            [graph]
            model = "ba"
            [policy]
            list = ["ts", "linucb"]
            [run]
            seeds = "3..5"
            timing = false
            "#,
        )
        .unwrap();
        assert_eq!(cfg.world.n, 4);
        assert_eq!(cfg.world.dynamics, DynamicsKind::Fixpoint);
        assert_eq!(cfg.policy.list, vec![PolicyKind::Thompson, PolicyKind::Linucb]);
        assert_eq!(cfg.run.seeds.0, vec![3, 4]);
        assert!(!cfg.run.timing);
    }

    #[test]
    fn field_level_errors() {
        let err = ExperimentConfig::from_toml_str("[world]\nn = 0\nalpha = 2.0\n[run]\nseeds = []\n").unwrap_err();
        let Error::Config(msgs) = err else { panic!("expected config error") };
        assert!(msgs.iter().any(|m| m.starts_with("world.n")));
        assert!(msgs.iter().any(|m| m.starts_with("world.alpha")));
        assert!(msgs.iter().any(|m| m.starts_with("run.seeds")));
    }

    #[test]
    fn linucb_needs_ball() {
        let err = ExperimentConfig::from_toml_str("[policy]\nlist = [\"linucb\"]\n").unwrap_err();
        assert!(err.to_string().contains("linucb"));
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(ExperimentConfig::from_toml_str("[world]\nusers = 3\n").is_err());
    }

    #[test]
    fn seed_syntax() {
        assert_eq!("0..3".parse::<Seeds>().unwrap().0, vec![0, 1, 2]);
        assert_eq!("7, 2,9".parse::<Seeds>().unwrap().0, vec![7, 2, 9]);
        assert!("x".parse::<Seeds>().is_err());
    }
}
