//! Input sampling, empirical-process paths and seeded replication.
//!
//! The empirical process of a homogeneous sum at time `t` keeps the supports
//! inside `[floor(m t)]`:
//! `W_t = sum_{J ⊆ [floor(m t)]} a_J prod_{i in J} X_i`. Paths are
//! piecewise constant on a time grid and right-continuous.
//!
//! All randomness comes from ChaCha8 streams. Replicate `r` of a run with
//! master seed `s` uses the stream seeded by [`replicate_seed`]`(s, r)`, so a
//! replicate never depends on how many others exist or on scheduling.

mod ensemble;
mod family;
mod path;

pub use ensemble::{
    monte_carlo, MomentSummary, MonteCarloConfig, ReplicationEnsemble, SUMMARY_CHUNK,
};
pub use family::{sample_inputs, InputFamily, Lambda, POISSON_INVERSION_LIMIT};
pub use path::{evaluate_path, evaluate_sum, power_time_change, sample_limit_path, ProcessPath};

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("Poisson intensity must be positive and finite, got {0}")]
    BadLambda(f64),
    #[error("input family: {0}")]
    BadFamily(String),
    #[error("need at least {expected} inputs, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("kernels have different sizes")]
    MixedSizes,
    #[error("no kernels given")]
    NoKernels,
    #[error("grid must be strictly increasing in [0, 1]: {0}")]
    BadGrid(String),
    #[error("time change {component} is not a nondecreasing function from 0: {reason}")]
    NonMonotoneTimeChange { component: usize, reason: String },
    #[error("replicate count must be at least 1")]
    NoReplicates,
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// `floor(m t)`, snapped to the nearest integer within a relative `1e-9`
/// so that grid points like `0.29` land on the intended cut.
pub fn grid_cut(m: usize, t: f64) -> usize {
    let x = m as f64 * t;
    let r = x.round();
    let cut = if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.floor()
    };
    (cut.max(0.0) as usize).min(m)
}

/// `points` equally spaced times from 0 to 1 inclusive.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    assert!(points >= 2, "a grid needs both endpoints");
    let last = (points - 1) as f64;
    (0..points).map(|i| i as f64 / last).collect()
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<(), SimError> {
    if grid.is_empty() {
        return Err(SimError::BadGrid("empty".into()));
    }
    if grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(SimError::BadGrid("time outside [0, 1]".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SimError::BadGrid("not strictly increasing".into()));
    }
    Ok(())
}

/// Standard normal draw by the Marsaglia polar method. Only the first of the
/// two variates produced per accepted pair is returned, which keeps the
/// sampler stateless.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u = 2.0 * rng.random::<f64>() - 1.0;
        let v = 2.0 * rng.random::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replicate `index` under master seed `master`.
pub fn replicate_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

/// Seed of an independent sub-stream `tag` of `master`, for experiments that
/// run several ensembles from one seed.
pub fn stream_seed(master: u64, tag: u64) -> u64 {
    splitmix64(master.rotate_left(17) ^ splitmix64(tag ^ 0x5bd1_e995))
}

pub(crate) fn rng_for(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
