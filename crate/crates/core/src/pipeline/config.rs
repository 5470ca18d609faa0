use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intervention::{OperatorKind, DEFAULT_ALPHABET, DEFAULT_MASK_TOKEN};
use crate::metrics::{MetricKind, QuantileGrid};
use crate::scoring::{ReadSet, SyntheticModelSpec};
use crate::stats::BootstrapConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub audit_set: PathBuf,
    pub priors: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_table: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedGrid {
    pub id: String,
    pub levels: QuantileGrid,
}

impl NamedGrid {
    pub fn new(id: impl Into<String>, levels: QuantileGrid) -> Self {
        Self {
            id: id.into(),
            levels,
        }
    }

    pub fn k3() -> Self {
        Self::new("K3", QuantileGrid::quartiles())
    }

    /// K3 quartiles, K5 at `i/6`, K9 at `i/10`.
    pub fn sensitivity_grids() -> Vec<Self> {
        vec![
            Self::k3(),
            Self::new("K5", QuantileGrid::equispaced(5).expect("k > 0")),
            Self::new("K9", QuantileGrid::equispaced(9).expect("k > 0")),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticParams {
    pub read_set: ReadSet,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub noise_sigma: f64,
}

fn default_alpha() -> f64 {
    1.0
}

impl SyntheticParams {
    pub fn spec(&self, model_seed: u64) -> SyntheticModelSpec {
        SyntheticModelSpec {
            read_set: self.read_set,
            alpha: self.alpha,
            beta: self.beta,
            noise_sigma: self.noise_sigma,
            model_seed,
        }
    }
}

/// How a model is reached. `{seed}` in paths and arguments is replaced with
/// the model seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdapterConfig {
    Synthetic(SyntheticParams),
    FileExchange {
        request_path: PathBuf,
        response_path: PathBuf,
        #[serde(default = "default_poll_ms")]
        poll_interval_ms: u64,
        #[serde(default = "default_timeout_ms")]
        timeout_ms: u64,
    },
    Subprocess {
        program: String,
        #[serde(default)]
        args: Vec<String>,
    },
}

fn default_poll_ms() -> u64 {
    100
}

fn default_timeout_ms() -> u64 {
    600_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub id: String,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub adapter: AdapterConfig,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    pub paths: PathsConfig,
    pub models: Vec<ModelConfig>,
    #[serde(default = "default_operators")]
    pub operators: Vec<OperatorKind>,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<MetricKind>,
    #[serde(default = "default_grids")]
    pub grids: Vec<NamedGrid>,
    #[serde(default)]
    pub bootstrap: BootstrapConfig,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_alphabet")]
    pub alphabet: String,
    #[serde(default = "default_mask")]
    pub mask_token: char,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_operators() -> Vec<OperatorKind> {
    vec![OperatorKind::Mask, OperatorKind::ClassSubstitution]
}

fn default_metrics() -> Vec<MetricKind> {
    MetricKind::ALL.to_vec()
}

fn default_grids() -> Vec<NamedGrid> {
    vec![NamedGrid::k3()]
}

fn default_alphabet() -> String {
    DEFAULT_ALPHABET.to_string()
}

fn default_mask() -> char {
    DEFAULT_MASK_TOKEN
}

impl AuditConfig {
    /// Config with defaults for everything but paths and models.
    pub fn new(paths: PathsConfig, models: Vec<ModelConfig>) -> Self {
        Self {
            paths,
            models,
            operators: default_operators(),
            metrics: default_metrics(),
            grids: default_grids(),
            bootstrap: BootstrapConfig::default(),
            master_seed: 0,
            alphabet: default_alphabet(),
            mask_token: default_mask(),
            base_dir: PathBuf::from("."),
        }
    }

    /// Reads a TOML config; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: AuditConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.base_dir = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        config.validate()?;
        for p in [Some(&config.paths.audit_set), Some(&config.paths.priors), config.paths.class_table.as_ref()]
            .into_iter()
            .flatten()
        {
            let resolved = config.resolve(p);
            if !resolved.exists() {
                return Err(Error::Config(format!("path does not exist: {}", resolved.display())));
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.operators.is_empty() {
            return Err(Error::Config("operator list is empty".into()));
        }
        if self.metrics.is_empty() {
            return Err(Error::Config("metric list is empty".into()));
        }
        if self.grids.is_empty() {
            return Err(Error::Config("grid list is empty".into()));
        }
        if self.models.is_empty() {
            return Err(Error::Config("no models configured".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for op in &self.operators {
            if !seen.insert(*op) {
                return Err(Error::Config(format!("operator {op} listed twice")));
            }
        }
        let mut ids = std::collections::BTreeSet::new();
        for g in &self.grids {
            if !ids.insert(&g.id) {
                return Err(Error::Config(format!("grid id {} listed twice", g.id)));
            }
        }
        let mut ids = std::collections::BTreeSet::new();
        for m in &self.models {
            if !ids.insert(&m.id) {
                return Err(Error::Config(format!("model id {} listed twice", m.id)));
            }
            if m.seeds.is_empty() {
                return Err(Error::Config(format!("model {} has no seeds", m.id)));
            }
            if let AdapterConfig::Synthetic(p) = &m.adapter {
                p.spec(0).validate()?;
            }
        }
        self.bootstrap.validate()
    }
}
