use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    check_grid, evaluate_path, replicate_seed, rng_for, InputFamily, ProcessPath, SimError,
};
use crate::combinatorics::pairwise_sum;
use crate::kernel::SparseKernel;

/// Replicates per partial sum in the summary reductions.
pub const SUMMARY_CHUNK: usize = 256;

/// Inputs of a replication run.
#[derive(Debug, Clone)]
pub struct MonteCarloConfig {
    pub kernels: Vec<SparseKernel>,
    pub family: InputFamily,
    pub grid: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub threads: Option<usize>,
}

/// Mean, sample variance and central fourth moment of one component at one
/// grid time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub time: f64,
    pub component: usize,
    pub mean: f64,
    pub variance: f64,
    pub m4: f64,
}

/// Paths of `N` independent replicates plus their per-time summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationEnsemble {
    seed: u64,
    grid: Vec<f64>,
    dimension: usize,
    orders: Vec<usize>,
    replicates: usize,
    values: Vec<f64>,
    summary: Vec<MomentSummary>,
}

fn chunked_sum(n: usize, f: impl Fn(usize) -> f64) -> f64 {
    let partials: Vec<f64> = (0..n)
        .step_by(SUMMARY_CHUNK)
        .map(|start| {
            let end = (start + SUMMARY_CHUNK).min(n);
            pairwise_sum(&(start..end).map(&f).collect::<Vec<_>>())
        })
        .collect();
    pairwise_sum(&partials)
}

impl ReplicationEnsemble {
    fn from_values(
        seed: u64,
        grid: Vec<f64>,
        dimension: usize,
        orders: Vec<usize>,
        replicates: usize,
        values: Vec<f64>,
    ) -> Self {
        let stride = grid.len() * dimension;
        let summary = (0..stride)
            .into_par_iter()
            .map(|slot| {
                let at = |r: usize| values[r * stride + slot];
                let n = replicates as f64;
                let mean = chunked_sum(replicates, at) / n;
                let m2 = chunked_sum(replicates, |r| (at(r) - mean).powi(2));
                let m4 = chunked_sum(replicates, |r| (at(r) - mean).powi(4)) / n;
                MomentSummary {
                    time: grid[slot / dimension],
                    component: slot % dimension,
                    mean,
                    variance: if replicates > 1 { m2 / (n - 1.0) } else { 0.0 },
                    m4,
                }
            })
            .collect();
        Self {
            seed,
            grid,
            dimension,
            orders,
            replicates,
            values,
            summary,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    /// Index of grid time `t`, if `t` is on the grid up to `1e-12`.
    pub fn time_index(&self, t: f64) -> Option<usize> {
        self.grid.iter().position(|&g| (g - t).abs() <= 1e-12)
    }

    /// Component `k` at grid index `g` across all replicates.
    pub fn marginal(&self, g: usize, k: usize) -> Vec<f64> {
        let stride = self.grid.len() * self.dimension;
        (0..self.replicates)
            .map(|r| self.values[r * stride + g * self.dimension + k])
            .collect()
    }

    /// Component `k` at the last grid time across all replicates.
    pub fn terminal(&self, k: usize) -> Vec<f64> {
        self.marginal(self.grid.len() - 1, k)
    }

    pub fn path(&self, r: usize) -> ProcessPath {
        let stride = self.grid.len() * self.dimension;
        ProcessPath::new(
            self.grid.clone(),
            self.dimension,
            self.orders.clone(),
            self.values[r * stride..(r + 1) * stride].to_vec(),
        )
        .expect("stored paths are well formed")
    }

    pub fn summary(&self) -> &[MomentSummary] {
        &self.summary
    }

    /// `replicate,w1,...,wd` rows of terminal values.
    pub fn terminal_csv(&self) -> String {
        let mut out = String::from("replicate");
        for k in 1..=self.dimension {
            write!(out, ",w{k}").unwrap();
        }
        out.push('\n');
        let stride = self.grid.len() * self.dimension;
        let last = (self.grid.len() - 1) * self.dimension;
        for r in 0..self.replicates {
            write!(out, "{r}").unwrap();
            for v in &self.values[r * stride + last..(r + 1) * stride] {
                write!(out, ",{v:?}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// `time,component,mean,var,m4` rows, components numbered from 1.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("time,component,mean,var,m4\n");
        for s in &self.summary {
            writeln!(
                out,
                "{:?},{},{:?},{:?},{:?}",
                s.time,
                s.component + 1,
                s.mean,
                s.variance,
                s.m4
            )
            .unwrap();
        }
        out
    }
}

fn run(config: &MonteCarloConfig) -> Vec<f64> {
    let m = config.kernels[0].size();
    (0..config.replicates)
        .into_par_iter()
        .map_init(
            || vec![0.0; m],
            |x, r| {
                let mut rng = rng_for(replicate_seed(config.seed, r as u64));
                config.family.sample_into(&mut rng, x);
                evaluate_path(&config.kernels, x, &config.grid)
                    .expect("validated")
                    .values()
                    .to_vec()
            },
        )
        .collect::<Vec<_>>()
        .concat()
}

/// Runs `N` seeded replicates. The result depends only on the config, never
/// on the thread count.
pub fn monte_carlo(config: &MonteCarloConfig) -> Result<ReplicationEnsemble, SimError> {
    let first = config.kernels.first().ok_or(SimError::NoKernels)?;
    if config.kernels.iter().any(|k| k.size() != first.size()) {
        return Err(SimError::MixedSizes);
    }
    if config.replicates == 0 {
        return Err(SimError::NoReplicates);
    }
    check_grid(&config.grid)?;
    config.family.validate(first.size())?;
    let values = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| SimError::ThreadPool(e.to_string()))?
            .install(|| run(config)),
        None => run(config),
    };
    Ok(ReplicationEnsemble::from_values(
        config.seed,
        config.grid.clone(),
        config.kernels.len(),
        config.kernels.iter().map(SparseKernel::order).collect(),
        config.replicates,
        values,
    ))
}
