use serde::{Deserialize, Serialize};

use super::StatsError;

/// Minimum sample size per sample for the Kolmogorov-Smirnov tests.
pub const KS_MIN_SAMPLES: usize = 20;

/// A Kolmogorov-Smirnov statistic with its asymptotic p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Effective sample size: `n`, or `n_a n_b / (n_a + n_b)`.
    pub effective_n: f64,
}

impl KsResult {
    /// Largest statistic not rejected at level `alpha`.
    pub fn critical_value(&self, alpha: f64) -> f64 {
        ks_critical_value(self.effective_n, alpha)
    }

    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

fn stephens(n_eff: f64) -> f64 {
    n_eff.sqrt() + 0.12 + 0.11 / n_eff.sqrt()
}

/// Kolmogorov survival function `Q(λ) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 λ^2)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut total = 0.0;
    for k in 1..=100 {
        let k = f64::from(k);
        let term = (-2.0 * k * k * lambda * lambda).exp();
        total += if k as u32 % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * total).clamp(0.0, 1.0)
}

fn p_value(d: f64, n_eff: f64) -> f64 {
    kolmogorov_survival(stephens(n_eff) * d)
}

/// Statistic at which the asymptotic p-value equals `alpha`.
pub fn ks_critical_value(n_eff: f64, alpha: f64) -> f64 {
    let (mut lo, mut hi) = (0.2, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_survival(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi) / stephens(n_eff)
}

fn sorted(samples: &[f64]) -> Result<Vec<f64>, StatsError> {
    if samples.iter().any(|x| x.is_nan()) {
        return Err(StatsError::NonFinite);
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// One-sample test of `samples` against the continuous CDF `cdf`.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult, StatsError> {
    let n = samples.len();
    if n < KS_MIN_SAMPLES {
        return Err(StatsError::TooFewSamples {
            needed: KS_MIN_SAMPLES,
            found: n,
        });
    }
    let xs = sorted(samples)?;
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / nf - f).max(f - i as f64 / nf);
    }
    Ok(KsResult {
        statistic: d,
        p_value: p_value(d, nf),
        effective_n: nf,
    })
}

/// Two-sample test; the statistic is the sup distance between the two
/// empirical CDFs, with ties handled jointly.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult, StatsError> {
    for s in [a, b] {
        if s.len() < KS_MIN_SAMPLES {
            return Err(StatsError::TooFewSamples {
                needed: KS_MIN_SAMPLES,
                found: s.len(),
            });
        }
    }
    let (xa, xb) = (sorted(a)?, sorted(b)?);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let n_eff = na * nb / (na + nb);
    Ok(KsResult {
        statistic: d,
        p_value: p_value(d, n_eff),
        effective_n: n_eff,
    })
}
