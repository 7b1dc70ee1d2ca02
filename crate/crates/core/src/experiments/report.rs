use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::profile::Profile;
use crate::error::{Error, Result};
use crate::fem::SolverOptions;
use crate::geometry::{Domain, DomainSpec};
use crate::norm::{DualPair, Norm, NormSpec};

fn default_h() -> f64 {
    0.05
}

fn default_load() -> f64 {
    1.0
}

/// Declarative description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub norm: NormSpec,
    pub domain: DomainSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Profile>,
    #[serde(default = "default_h")]
    pub h: f64,
    /// Constant right-hand side `f`.
    #[serde(default = "default_load")]
    pub load: f64,
    #[serde(default)]
    pub solver: SolverOptions,
}

impl ExperimentConfig {
    pub fn new(norm: NormSpec, domain: DomainSpec, h: f64) -> Self {
        ExperimentConfig {
            norm,
            domain,
            profile: None,
            h,
            load: 1.0,
            solver: SolverOptions::default(),
        }
    }

    pub fn with_profile(mut self, profile: Profile) -> Self {
        self.profile = Some(profile);
        self
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        config_hash(self)
    }
}

pub fn config_hash<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_string(value).expect("config serializes");
    let digest = Sha256::digest(json.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// A validated experiment: the norm pair and domain built from a config.
#[derive(Debug, Clone)]
pub struct Problem {
    pub config: ExperimentConfig,
    pub pair: DualPair,
    pub domain: Domain,
}

impl Problem {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        let norm = Norm::new(config.norm.clone())?;
        if norm.dim() != 2 {
            return Err(Error::config("experiments are planar; the norm must be 2-dimensional"));
        }
        let pair = DualPair::new(norm);
        let domain = Domain::new(&config.domain, pair.primal())?;
        if !(config.h > 0.0 && config.h.is_finite()) {
            return Err(Error::config("h must be positive"));
        }
        if !(config.load >= 0.0 && config.load.is_finite()) {
            return Err(Error::config("load must be a nonnegative constant"));
        }
        config.solver.validate()?;
        if let Some(p) = &config.profile {
            p.validate()?;
        }
        Ok(Problem { config, pair, domain })
    }
}

/// One pass/fail decision with the numbers behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    /// How `value` was compared with `tolerance`, e.g. `"<="`.
    pub relation: String,
    pub detail: String,
}

impl Verdict {
    pub fn at_most(name: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Verdict {
            name: name.into(),
            passed: value <= tolerance,
            value,
            tolerance,
            relation: "<=".into(),
            detail: detail.into(),
        }
    }

    pub fn at_least(name: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Verdict {
            name: name.into(),
            passed: value >= tolerance,
            value,
            tolerance,
            relation: ">=".into(),
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub h: f64,
    pub solver_residual: f64,
    pub solver_iterations: usize,
    pub triangles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub stats: BTreeMap<String, f64>,
    /// Qualitative observations that are not pass/fail checks.
    pub flags: BTreeMap<String, bool>,
    pub verdicts: Vec<Verdict>,
    pub provenance: Provenance,
}

impl ExperimentReport {
    pub fn new(experiment: &str, provenance: Provenance) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            stats: BTreeMap::new(),
            flags: BTreeMap::new(),
            verdicts: Vec::new(),
            provenance,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn stat(&self, name: &str) -> Option<f64> {
        self.stats.get(name).copied()
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.stats.insert(name.into(), value);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
