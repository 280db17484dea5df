//! Statistical functionals turning replication ensembles into pass/fail
//! evidence: fourth cumulants, Kolmogorov-Smirnov tests, grid covariances
//! and the modulus of continuity of step paths.

mod ks;
mod report;

pub use ks::{
    kolmogorov_survival, ks_critical_value, ks_one_sample, ks_two_sample, KsResult, KS_MIN_SAMPLES,
};
pub use report::{
    universality_report, DiagnosticEntry, DiagnosticReport, UniversalityConfig, SIGNIFICANCE,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::{ProcessPath, ReplicationEnsemble};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("need at least {needed} samples, got {found}")]
    TooFewSamples { needed: usize, found: usize },
    #[error("samples contain NaN")]
    NonFinite,
    #[error("time {0} is not on the ensemble grid")]
    OffGrid(f64),
    #[error("component {0} does not exist")]
    BadComponent(usize),
    #[error("delta must lie in (0, 1], got {0}")]
    BadDelta(f64),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
}

/// Minimum sample size for [`fourth_cumulant`].
pub const CUMULANT_MIN_SAMPLES: usize = 8;

/// `κ4 = m4 - 3 m2^2` from central sample moments, with a jackknife standard
/// error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantEstimate {
    pub kappa4: f64,
    pub m2: f64,
    pub m4: f64,
    pub standard_error: f64,
    pub n: usize,
    /// Set when the samples have zero spread.
    pub degenerate: bool,
}

fn central_kappa(s1: f64, s2: f64, s3: f64, s4: f64, n: f64) -> (f64, f64, f64) {
    let mu = s1 / n;
    let (e2, e3, e4) = (s2 / n, s3 / n, s4 / n);
    let m2 = e2 - mu * mu;
    let m4 = e4 - 4.0 * mu * e3 + 6.0 * mu * mu * e2 - 3.0 * mu.powi(4);
    (m4 - 3.0 * m2 * m2, m2, m4)
}

pub fn fourth_cumulant(samples: &[f64]) -> Result<CumulantEstimate, StatsError> {
    let n = samples.len();
    if n < CUMULANT_MIN_SAMPLES {
        return Err(StatsError::TooFewSamples {
            needed: CUMULANT_MIN_SAMPLES,
            found: n,
        });
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let nf = n as f64;
    let shift = samples.iter().sum::<f64>() / nf;
    let ys: Vec<f64> = samples.iter().map(|x| x - shift).collect();
    let m2 = ys.iter().map(|y| y * y).sum::<f64>() / nf;
    let m4 = ys.iter().map(|y| y.powi(4)).sum::<f64>() / nf;
    let kappa4 = m4 - 3.0 * m2 * m2;

    let s: [f64; 4] = [1, 2, 3, 4].map(|k| ys.iter().map(|y| y.powi(k)).sum());
    let loo: Vec<f64> = ys
        .iter()
        .map(|&y| {
            central_kappa(
                s[0] - y,
                s[1] - y * y,
                s[2] - y.powi(3),
                s[3] - y.powi(4),
                nf - 1.0,
            )
            .0
        })
        .collect();
    let mean_loo = loo.iter().sum::<f64>() / nf;
    let spread = loo.iter().map(|k| (k - mean_loo).powi(2)).sum::<f64>();
    Ok(CumulantEstimate {
        kappa4,
        m2,
        m4,
        standard_error: ((nf - 1.0) / nf * spread).sqrt(),
        n,
        degenerate: m2 == 0.0,
    })
}

/// Sample covariance with the standard error of the mean of centered
/// products.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEstimate {
    pub covariance: f64,
    pub standard_error: f64,
    pub n: usize,
}

pub fn sample_covariance(x: &[f64], y: &[f64]) -> Result<CovarianceEstimate, StatsError> {
    let n = x.len().min(y.len());
    if n < 2 {
        return Err(StatsError::TooFewSamples {
            needed: 2,
            found: n,
        });
    }
    let nf = n as f64;
    let mx = x[..n].iter().sum::<f64>() / nf;
    let my = y[..n].iter().sum::<f64>() / nf;
    let products: Vec<f64> = x[..n]
        .iter()
        .zip(&y[..n])
        .map(|(a, b)| (a - mx) * (b - my))
        .collect();
    let mean_product = products.iter().sum::<f64>() / nf;
    let var_product = products
        .iter()
        .map(|p| (p - mean_product).powi(2))
        .sum::<f64>()
        / (nf - 1.0);
    Ok(CovarianceEstimate {
        covariance: mean_product * nf / (nf - 1.0),
        standard_error: (var_product / nf).sqrt(),
        n,
    })
}

/// `Cov(W_s(k), W_t(l))` across the replicates of `ensemble`; components are
/// 0-based.
pub fn empirical_covariance(
    ensemble: &ReplicationEnsemble,
    s: f64,
    t: f64,
    k: usize,
    l: usize,
) -> Result<CovarianceEstimate, StatsError> {
    let gs = ensemble.time_index(s).ok_or(StatsError::OffGrid(s))?;
    let gt = ensemble.time_index(t).ok_or(StatsError::OffGrid(t))?;
    for c in [k, l] {
        if c >= ensemble.dimension() {
            return Err(StatsError::BadComponent(c));
        }
    }
    sample_covariance(&ensemble.marginal(gs, k), &ensemble.marginal(gt, l))
}

/// `ω(x, δ) = sup { |x(t) - x(s)| : |t - s| < δ }` for the piecewise-constant
/// path, maximized over components.
///
/// Grid values `v_i` hold on `[t_i, t_{i+1})` (the last one only at its own
/// time), so values `i < j` are within reach iff `t_j - t_{i+1} < δ`.
pub fn modulus_of_continuity(path: &ProcessPath, delta: f64) -> Result<f64, StatsError> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(StatsError::BadDelta(delta));
    }
    let grid = path.grid();
    let mut best: f64 = 0.0;
    for i in 0..grid.len() {
        let vi = path.at(i);
        for j in (i + 1)..grid.len() {
            if grid[j] - grid[i + 1] >= delta {
                break;
            }
            for (a, b) in vi.iter().zip(path.at(j)) {
                best = best.max((a - b).abs());
            }
        }
    }
    Ok(best)
}
