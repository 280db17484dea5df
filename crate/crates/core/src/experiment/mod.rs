//! Config-driven experiments behind the `ustat` command line.
//!
//! Every run is a pure function of its [`ExperimentConfig`] (after command
//! line overrides): all randomness derives from the master seed, every
//! output file opens with the config hash, and the manifest records no
//! wall-clock data, so equal hashes give byte-identical output directories.

mod build;
mod cli;
mod config;
mod simulate;
mod verify;

pub use build::{build_kernel, kernel_diagnostics, BuildRequest, KernelDiagnostics};
pub use cli::{run, Cli};
pub use config::{
    ExperimentConfig, FileKernel, FractionalKernel, KernelSpec, RandomKernel, Suite, Thresholds,
    VerifySettings, SCHEMA,
};
pub use simulate::{simulate, SimulationOutput};
pub use verify::{verify, VerificationSummary};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Kernel(#[from] crate::kernel::KernelError),
    #[error(transparent)]
    Hoeffding(#[from] crate::hoeffding::HoeffdingError),
    #[error(transparent)]
    Quadruple(#[from] crate::quadruple::QuadrupleError),
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
    #[error(transparent)]
    Stats(#[from] crate::stats::StatsError),
}

/// Exit code for usage and configuration errors.
pub const EXIT_USAGE: i32 = 2;

/// Result of a completed run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Self::Pass => 0,
            Self::Fail => 1,
        }
    }
}

/// Provenance of an output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub config_hash: String,
    pub schema: String,
    pub command: String,
    pub suite: String,
    pub seed: u64,
    pub replicates: usize,
    pub outcome: Outcome,
    pub files: Vec<String>,
    pub config: ExperimentConfig,
}

pub(crate) fn hash_line(hash: &str) -> String {
    format!("# config_hash: {hash}\n")
}

pub(crate) fn pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

/// Named output files, written in one pass.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct OutputSet {
    files: Vec<(String, String)>,
}

impl OutputSet {
    pub fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    /// A CSV body prefixed with the hash comment line.
    pub fn add_csv(&mut self, name: impl Into<String>, hash: &str, body: &str) {
        self.add(name, hash_line(hash) + body);
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_str())
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn write(&self, dir: &Path) -> Result<(), ExperimentError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| ExperimentError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        for (name, contents) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, contents).map_err(io(&path))?;
        }
        Ok(())
    }
}
