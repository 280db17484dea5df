use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ExperimentError;
use crate::kernel::{fractional_kernel, random_kernel, SparseKernel};
use crate::sim::{rng_for, uniform_grid, InputFamily};

/// Current config schema tag.
pub const SCHEMA: &str = "ustat-experiment/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Identities,
    Inequalities,
    Fclt,
    Universality,
    Diagnostics,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Self::Identities => "identities",
            Self::Inequalities => "inequalities",
            Self::Fclt => "fclt",
            Self::Universality => "universality",
            Self::Diagnostics => "diagnostics",
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Self::Identities | Self::Inequalities)
    }
}

impl std::str::FromStr for Suite {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| ExperimentError::Config(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileKernel {
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FractionalKernel {
    pub order: usize,
    pub arity: usize,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomKernel {
    pub order: usize,
    pub size: usize,
    pub density: f64,
    pub seed: u64,
}

/// Where a kernel comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSpec {
    File(FileKernel),
    Fractional(FractionalKernel),
    Random(RandomKernel),
}

impl KernelSpec {
    pub fn build(&self) -> Result<SparseKernel, ExperimentError> {
        Ok(match self {
            Self::File(f) => {
                let text = read(&f.path)?;
                if text.trim_start().starts_with('{') {
                    SparseKernel::from_json(&text)?
                } else {
                    SparseKernel::from_text(&text)?
                }
            }
            Self::Fractional(f) => fractional_kernel(f.order, f.arity, f.size)?,
            Self::Random(r) => {
                if !(r.density > 0.0 && r.density <= 1.0) {
                    return Err(ExperimentError::Config(format!(
                        "density must lie in (0, 1], got {}",
                        r.density
                    )));
                }
                random_kernel(r.order, r.size, r.density, &mut rng_for(r.seed))?
            }
        })
    }

    /// Exponent `e` of the limiting time change `t^e`, when known.
    pub fn limit_exponent(&self) -> Option<f64> {
        match self {
            Self::Fractional(f) => Some(f.order as f64 / f.arity as f64),
            _ => None,
        }
    }
}

/// Settings of the exact randomized suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySettings {
    pub instances: usize,
    /// Largest `m`, `n` of the random pairs.
    pub max_size: usize,
    /// Largest order `p`, `q` of the random pairs.
    pub max_order: usize,
    /// Count mismatches of the uncorrected covariance identity as violations.
    pub strict_stated: bool,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            instances: 200,
            max_size: 6,
            max_order: 2,
            strict_stated: false,
        }
    }
}

/// Thresholds of the Monte Carlo suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Bound on `|κ4(W_1)|`.
    pub kappa4: f64,
    /// Allowed deviation of covariance and moment estimates, in standard errors.
    pub standard_errors: f64,
    /// Bound on `max_t |Sf(t) - t^e|` for kernels with a known limit.
    pub time_change: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            kappa4: 0.15,
            standard_errors: 4.0,
            time_change: 0.05,
        }
    }
}

fn default_schema() -> String {
    SCHEMA.to_string()
}

fn default_family() -> InputFamily {
    InputFamily::Rademacher
}

fn default_grid_points() -> usize {
    101
}

fn default_replicates() -> usize {
    1000
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema: String,
    pub suite: Suite,
    #[serde(default)]
    pub kernels: Vec<KernelSpec>,
    #[serde(default = "default_family")]
    pub family: InputFamily,
    /// Families compared by the universality suite.
    #[serde(default)]
    pub families: Vec<InputFamily>,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; not part of the config hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub verify: VerifySettings,
    #[serde(default)]
    pub thresholds: Thresholds,
}

pub(crate) fn read(path: &Path) -> Result<String, ExperimentError> {
    std::fs::read_to_string(path).map_err(|e| ExperimentError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl ExperimentConfig {
    pub fn new(suite: Suite) -> Self {
        serde_json::from_value(serde_json::json!({ "suite": suite })).expect("defaults deserialize")
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        serde_json::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        Self::from_json(&read(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn grid(&self) -> Vec<f64> {
        uniform_grid(self.grid_points)
    }

    /// Checks everything that can be checked without running.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: String| Err(ExperimentError::Config(msg));
        if self.schema != SCHEMA {
            return bad(format!(
                "unsupported schema `{}`, expected `{SCHEMA}`",
                self.schema
            ));
        }
        if self.grid_points < 2 {
            return bad("grid_points must be at least 2".into());
        }
        if self.suite.is_exact() {
            let v = &self.verify;
            if v.instances == 0 {
                return bad("verify.instances must be at least 1".into());
            }
            if !(1..=3).contains(&v.max_order) || v.max_size < 2 || v.max_size > 8 {
                return bad("verify needs 1 <= max_order <= 3 and 2 <= max_size <= 8".into());
            }
            if v.max_size < v.max_order {
                return bad("verify.max_size must be at least verify.max_order".into());
            }
            return Ok(());
        }
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if self.kernels.is_empty() {
            return bad(format!(
                "suite `{}` needs at least one kernel",
                self.suite.name()
            ));
        }
        if self.suite == Suite::Universality && self.families.len() < 2 {
            return bad("universality needs at least two families".into());
        }
        let t = &self.thresholds;
        if !(t.kappa4 > 0.0 && t.standard_errors > 0.0 && t.time_change > 0.0) {
            return bad("thresholds must be positive".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical config (without `output`) followed by the
    /// bytes of every kernel file it references.
    pub fn hash(&self) -> Result<String, ExperimentError> {
        let mut canonical = self.clone();
        canonical.output = None;
        let mut bytes = serde_json::to_vec(&canonical).expect("config serializes");
        for spec in &self.kernels {
            if let KernelSpec::File(f) = spec {
                bytes.extend_from_slice(read(&f.path)?.as_bytes());
            }
        }
        Ok(hex_digest(&bytes))
    }

    /// Builds the kernels and checks they share one size.
    pub fn build_kernels(&self) -> Result<Vec<SparseKernel>, ExperimentError> {
        let kernels = self
            .kernels
            .iter()
            .map(KernelSpec::build)
            .collect::<Result<Vec<_>, _>>()?;
        if kernels.windows(2).any(|w| w[0].size() != w[1].size()) {
            return Err(ExperimentError::Config(
                "kernels must share one size m".into(),
            ));
        }
        Ok(kernels)
    }
}
