use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{pretty_json, ExperimentConfig, ExperimentError, Outcome, OutputSet, Suite};
use crate::quadruple::{
    check_covariance_identity, check_s0_upper_bound, check_varlemma2, random_pair, s0_value,
    s1_value, LemmaCase, RandomPair, VerificationRecord, VIOLATION_TOLERANCE,
};
use crate::sim::{replicate_seed, rng_for, stream_seed};

/// Tolerance of the `S0(W, W) = S1(W, W)` check.
pub const QUADRUPLE_SUM_TOLERANCE: f64 = 1e-12;

const COVARIANCE: &str = "covariance_identity";
const COVARIANCE_STATED: &str = "covariance_identity_stated";
const S0_S1: &str = "s0_equals_s1";
const S0_BOUND: &str = "s0_upper_bound";
const EQUAL_ORDERS: &str = "variance_bound_equal_orders";
const DISTINCT_ORDERS: &str = "variance_bound_distinct_orders";

/// Per-check tally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckTally {
    pub check: String,
    pub instances: usize,
    pub violations: usize,
    /// Smallest `margin`; negative means violated.
    pub worst_margin: f64,
    /// Whether violations of this check fail the run.
    pub enforced: bool,
}

/// Everything `verify` writes to `verify_<suite>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationSummary {
    pub config_hash: String,
    pub suite: Suite,
    pub seed: u64,
    pub instances: usize,
    pub violations: usize,
    pub outcome: Outcome,
    pub checks: Vec<CheckTally>,
    pub records: Vec<VerificationRecord>,
}

impl VerificationSummary {
    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }

    pub fn tally(&self, check: &str) -> Option<&CheckTally> {
        self.checks.iter().find(|c| c.check == check)
    }

    pub fn to_csv(&self) -> String {
        let mut out = super::hash_line(&self.config_hash);
        out.push_str(VerificationRecord::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }
}

fn record(
    check: &str,
    instance: usize,
    pair: &RandomPair,
    lhs: f64,
    rhs: f64,
    margin: f64,
) -> VerificationRecord {
    VerificationRecord {
        check: check.into(),
        instance,
        m: pair.v.size(),
        n: pair.w.size(),
        q: pair.v.order(),
        p: pair.w.order(),
        lhs,
        rhs,
        margin,
        pass: margin >= 0.0,
    }
}

fn draw_pair<R: Rng>(
    rng: &mut R,
    q: usize,
    p: usize,
    max_size: usize,
) -> Result<RandomPair, ExperimentError> {
    let m = rng.random_range(q.max(2)..=max_size);
    let n = rng.random_range(p.max(2)..=max_size);
    Ok(random_pair(q, m, p, n, rng)?)
}

fn identities(
    instance: usize,
    seed: u64,
    cfg: &ExperimentConfig,
) -> Result<Vec<VerificationRecord>, ExperimentError> {
    let mut rng = rng_for(seed);
    let top = cfg.verify.max_order;
    let (q, p) = (rng.random_range(1..=top), rng.random_range(1..=top));
    let pair = draw_pair(&mut rng, q, p, cfg.verify.max_size)?;
    let space = &pair.space;
    let id = check_covariance_identity(&pair.v, &pair.w, space)?;
    let s0 = s0_value(&pair.w, &pair.w, space)?;
    let s1 = s1_value(&pair.w, &pair.w, space)?;
    Ok(vec![
        record(
            COVARIANCE,
            instance,
            &pair,
            id.lhs,
            id.rhs(),
            VIOLATION_TOLERANCE - id.residual(),
        ),
        record(
            COVARIANCE_STATED,
            instance,
            &pair,
            id.lhs,
            id.rhs_stated,
            VIOLATION_TOLERANCE - id.stated_residual(),
        ),
        record(
            S0_S1,
            instance,
            &pair,
            s0,
            s1,
            QUADRUPLE_SUM_TOLERANCE - (s0 - s1).abs(),
        ),
    ])
}

fn bound_record(
    check: &str,
    instance: usize,
    pair: &RandomPair,
    b: crate::quadruple::BoundCheck,
) -> VerificationRecord {
    let mut r = record(check, instance, pair, b.value, b.bound, b.margin());
    r.pass = b.holds();
    r
}

fn inequalities(
    instance: usize,
    seed: u64,
    cfg: &ExperimentConfig,
) -> Result<Vec<VerificationRecord>, ExperimentError> {
    let mut rng = rng_for(seed);
    let top = cfg.verify.max_order;
    let p = rng.random_range(1..=top);
    let equal = draw_pair(&mut rng, p, p, cfg.verify.max_size)?;
    let mut out = vec![
        bound_record(
            S0_BOUND,
            instance,
            &equal,
            check_s0_upper_bound(&equal.w, &equal.space)?,
        ),
        bound_record(
            EQUAL_ORDERS,
            instance,
            &equal,
            check_varlemma2(&equal.v, &equal.w, &equal.space, LemmaCase::I)?,
        ),
    ];
    if top >= 2 {
        let q = rng.random_range(1..=top);
        let p = loop {
            let p = rng.random_range(1..=top);
            if p != q {
                break p;
            }
        };
        let distinct = draw_pair(&mut rng, q, p, cfg.verify.max_size)?;
        out.push(bound_record(
            DISTINCT_ORDERS,
            instance,
            &distinct,
            check_varlemma2(&distinct.v, &distinct.w, &distinct.space, LemmaCase::Ii)?,
        ));
    }
    Ok(out)
}

fn tally(records: &[VerificationRecord], strict_stated: bool) -> Vec<CheckTally> {
    let mut checks: Vec<CheckTally> = Vec::new();
    for r in records {
        let pos = match checks.iter().position(|c| c.check == r.check) {
            Some(pos) => pos,
            None => {
                checks.push(CheckTally {
                    check: r.check.clone(),
                    instances: 0,
                    violations: 0,
                    worst_margin: f64::INFINITY,
                    enforced: r.check != COVARIANCE_STATED || strict_stated,
                });
                checks.len() - 1
            }
        };
        let c = &mut checks[pos];
        c.instances += 1;
        c.violations += usize::from(!r.pass);
        c.worst_margin = c.worst_margin.min(r.margin);
    }
    checks
}

/// Runs the randomized exact suite selected by `cfg.suite`. Instance `i`
/// draws from its own stream of the master seed, so results do not depend
/// on scheduling.
pub fn verify(
    cfg: &ExperimentConfig,
    config_hash: &str,
) -> Result<(VerificationSummary, OutputSet), ExperimentError> {
    cfg.validate()?;
    let run = match cfg.suite {
        Suite::Identities => identities,
        Suite::Inequalities => inequalities,
        other => {
            return Err(ExperimentError::Config(format!(
                "verify runs identities or inequalities, not `{}`",
                other.name()
            )))
        }
    };
    let base = stream_seed(cfg.seed, cfg.suite as u64);
    let records: Vec<VerificationRecord> = (0..cfg.verify.instances)
        .into_par_iter()
        .map(|i| run(i, replicate_seed(base, i as u64), cfg))
        .collect::<Result<Vec<_>, _>>()?
        .concat();
    let checks = tally(&records, cfg.verify.strict_stated);
    let violations = checks
        .iter()
        .filter(|c| c.enforced)
        .map(|c| c.violations)
        .sum();
    let summary = VerificationSummary {
        config_hash: config_hash.to_string(),
        suite: cfg.suite,
        seed: cfg.seed,
        instances: cfg.verify.instances,
        violations,
        outcome: Outcome::from_pass(violations == 0),
        checks,
        records,
    };
    let mut out = OutputSet::default();
    let name = format!("verify_{}", cfg.suite.name());
    out.add(format!("{name}.json"), pretty_json(&summary));
    out.add(format!("{name}.csv"), summary.to_csv());
    Ok((summary, out))
}
