use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{ks_two_sample, StatsError};
use crate::kernel::SparseKernel;
use crate::sim::{monte_carlo, stream_seed, InputFamily, MonteCarloConfig, ReplicationEnsemble};

/// Family-wise level of every report.
pub const SIGNIFICANCE: f64 = 0.01;

/// One named result. An entry passes when `statistic <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticEntry {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub standard_error: Option<f64>,
    pub p_value: Option<f64>,
    pub sample_size: usize,
}

impl DiagnosticEntry {
    pub fn bounded(name: impl Into<String>, statistic: f64, threshold: f64, n: usize) -> Self {
        Self {
            name: name.into(),
            statistic,
            threshold,
            pass: statistic <= threshold,
            standard_error: None,
            p_value: None,
            sample_size: n,
        }
    }

    pub fn with_standard_error(mut self, se: f64) -> Self {
        self.standard_error = Some(se);
        self
    }

    pub fn with_p_value(mut self, p: f64) -> Self {
        self.p_value = Some(p);
        self
    }
}

/// Results of one experiment with their provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticReport {
    pub config_hash: String,
    pub seed: u64,
    pub replicates: usize,
    pub entries: Vec<DiagnosticEntry>,
    pub notes: Vec<String>,
}

impl DiagnosticReport {
    pub fn new(config_hash: impl Into<String>, seed: u64, replicates: usize) -> Self {
        Self {
            config_hash: config_hash.into(),
            seed,
            replicates,
            entries: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, entry: DiagnosticEntry) {
        self.entries.push(entry);
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &DiagnosticEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Flat rows, preceded by a `# config_hash` line.
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:?}"));
        let mut out = format!("# config_hash: {}\n", self.config_hash);
        out.push_str("name,statistic,threshold,standard_error,p_value,sample_size,pass\n");
        for e in &self.entries {
            writeln!(
                out,
                "{},{:?},{:?},{},{},{},{}",
                e.name,
                e.statistic,
                e.threshold,
                opt(e.standard_error),
                opt(e.p_value),
                e.sample_size,
                e.pass
            )
            .unwrap();
        }
        out
    }
}

/// Settings of a universality comparison.
#[derive(Debug, Clone)]
pub struct UniversalityConfig {
    pub kernels: Vec<SparseKernel>,
    pub families: Vec<InputFamily>,
    pub grid: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub threads: Option<usize>,
    /// Interior times whose marginals are compared besides the terminal one.
    pub interior_times: Vec<f64>,
}

fn nearest_index(grid: &[f64], t: f64) -> usize {
    let mut best = 0;
    for (i, g) in grid.iter().enumerate() {
        if (g - t).abs() < (grid[best] - t).abs() {
            best = i;
        }
    }
    best
}

/// Ensembles for each family (the `i`-th on its own sub-stream of the
/// master seed), compared pairwise by two-sample KS tests on the terminal
/// and interior marginals of every component, Bonferroni-corrected at
/// [`SIGNIFICANCE`].
pub fn universality_report(
    config: &UniversalityConfig,
    config_hash: &str,
) -> Result<(DiagnosticReport, Vec<ReplicationEnsemble>), StatsError> {
    if config.families.len() < 2 {
        return Err(StatsError::Config(
            "universality needs at least two input families".into(),
        ));
    }
    let ensembles = config
        .families
        .iter()
        .enumerate()
        .map(|(i, family)| {
            monte_carlo(&MonteCarloConfig {
                kernels: config.kernels.clone(),
                family: family.clone(),
                grid: config.grid.clone(),
                replicates: config.replicates,
                seed: stream_seed(config.seed, i as u64),
                threads: config.threads,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut slots: Vec<usize> = config
        .interior_times
        .iter()
        .map(|&t| nearest_index(&config.grid, t))
        .collect();
    slots.push(config.grid.len() - 1);
    let dims = config.kernels.len();
    let pairs = config.families.len() * (config.families.len() - 1) / 2;
    let tests = pairs * slots.len() * dims;
    let alpha = SIGNIFICANCE / tests as f64;

    let mut report = DiagnosticReport::new(config_hash, config.seed, config.replicates);
    for a in 0..ensembles.len() {
        for b in (a + 1)..ensembles.len() {
            for &g in &slots {
                for k in 0..dims {
                    let r =
                        ks_two_sample(&ensembles[a].marginal(g, k), &ensembles[b].marginal(g, k))?;
                    let name = format!(
                        "ks2 {}#{a} vs {}#{b} component {} t={:?}",
                        config.families[a].name(),
                        config.families[b].name(),
                        k + 1,
                        config.grid[g]
                    );
                    report.push(
                        DiagnosticEntry::bounded(
                            name,
                            r.statistic,
                            r.critical_value(alpha),
                            config.replicates,
                        )
                        .with_p_value(r.p_value),
                    );
                }
            }
        }
    }
    report.notes.push(format!(
        "{tests} two-sample KS tests, Bonferroni level {SIGNIFICANCE}/{tests}"
    ));
    report.notes.push(
        "path laws are compared through finite-dimensional marginals only; tightness is not tested"
            .into(),
    );
    Ok((report, ensembles))
}
