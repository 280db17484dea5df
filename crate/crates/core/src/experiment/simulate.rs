use statrs::distribution::{ContinuousCDF, Normal};

use super::{pretty_json, ExperimentConfig, ExperimentError, OutputSet, Suite};
use crate::kernel::{contraction_norm, SparseKernel, NORMALIZATION_TOLERANCE};
use crate::sim::{
    monte_carlo, replicate_seed, rng_for, sample_limit_path, stream_seed, MonteCarloConfig,
    ReplicationEnsemble,
};
use crate::stats::{
    empirical_covariance, fourth_cumulant, ks_one_sample, modulus_of_continuity,
    universality_report, DiagnosticEntry, DiagnosticReport, UniversalityConfig, SIGNIFICANCE,
};

/// Times at which variances are compared.
pub const CHECK_TIMES: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
/// Time pairs at which covariances are compared.
pub const CHECK_PAIRS: [(f64, f64); 3] = [(0.25, 0.5), (0.25, 1.0), (0.5, 0.75)];
/// Window of the modulus-of-continuity summary.
pub const MODULUS_DELTA: f64 = 0.1;
const MODULUS_PATHS: usize = 200;
const INPUT_STREAM: u64 = 0x1_0000;
const LIMIT_STREAM: u64 = 0x2_0000;

/// Report, ensembles and files of one `simulate` run.
#[derive(Debug)]
pub struct SimulationOutput {
    pub report: DiagnosticReport,
    pub ensembles: Vec<ReplicationEnsemble>,
    pub files: OutputSet,
}

/// `|estimate - target| / se` as an entry bounded by `threshold`.
fn z_entry(
    name: String,
    estimate: f64,
    target: f64,
    se: f64,
    threshold: f64,
    n: usize,
) -> DiagnosticEntry {
    let gap = (estimate - target).abs();
    let z = if se > 0.0 {
        gap / se
    } else if gap == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    DiagnosticEntry::bounded(name, z, threshold, n).with_standard_error(se)
}

fn on_grid(ens: &ReplicationEnsemble, times: &[f64], report: &mut DiagnosticReport) -> Vec<f64> {
    let (kept, dropped): (Vec<f64>, Vec<f64>) =
        times.iter().partition(|&&t| ens.time_index(t).is_some());
    if !dropped.is_empty() {
        report.notes.push(format!(
            "times {dropped:?} are not grid points and were skipped"
        ));
    }
    kept
}

fn time_change_entry(
    kernel: &SparseKernel,
    exponent: f64,
    k: usize,
    bound: f64,
) -> DiagnosticEntry {
    let times: Vec<f64> = (0..=10).map(|i| f64::from(i) / 10.0).collect();
    let dev = kernel
        .prefix_profile(&times)
        .iter()
        .zip(&times)
        .map(|(sf, t)| (sf - t.powf(exponent)).abs())
        .fold(0.0, f64::max);
    DiagnosticEntry::bounded(
        format!("time change w{k} max |Sf(t) - t^{exponent}|"),
        dev,
        bound,
        11,
    )
}

fn kappa_entry(
    ens: &ReplicationEnsemble,
    k: usize,
    bound: f64,
) -> Result<DiagnosticEntry, ExperimentError> {
    let c = fourth_cumulant(&ens.terminal(k))?;
    Ok(
        DiagnosticEntry::bounded(format!("kappa4 w{}(1)", k + 1), c.kappa4.abs(), bound, c.n)
            .with_standard_error(c.standard_error),
    )
}

fn modulus_note(
    ens: &ReplicationEnsemble,
    kernels: &[SparseKernel],
    seed: u64,
) -> Result<String, ExperimentError> {
    let grid = ens.grid();
    let changes: Vec<Vec<f64>> = kernels.iter().map(|k| k.prefix_profile(grid)).collect();
    let paths = ens.replicates().min(MODULUS_PATHS);
    let (mut emp, mut lim) = (0.0, 0.0);
    for r in 0..paths {
        emp += modulus_of_continuity(&ens.path(r), MODULUS_DELTA)?;
        let z = sample_limit_path(
            &changes,
            grid,
            replicate_seed(stream_seed(seed, LIMIT_STREAM), r as u64),
        )?;
        lim += modulus_of_continuity(&z, MODULUS_DELTA)?;
    }
    let n = paths as f64;
    Ok(format!(
        "mean modulus of continuity at delta={MODULUS_DELTA} over {paths} paths: simulated {:.4}, Gaussian limit with the same time change {:.4}",
        emp / n,
        lim / n
    ))
}

fn ensemble(
    cfg: &ExperimentConfig,
    kernels: &[SparseKernel],
) -> Result<ReplicationEnsemble, ExperimentError> {
    Ok(monte_carlo(&MonteCarloConfig {
        kernels: kernels.to_vec(),
        family: cfg.family.clone(),
        grid: cfg.grid(),
        replicates: cfg.replicates,
        seed: cfg.seed,
        threads: None,
    })?)
}

fn fclt(
    cfg: &ExperimentConfig,
    kernels: &[SparseKernel],
    report: &mut DiagnosticReport,
) -> Result<ReplicationEnsemble, ExperimentError> {
    let ens = ensemble(cfg, kernels)?;
    let thr = &cfg.thresholds;
    let n = ens.replicates();
    let dims = kernels.len();
    let alpha = SIGNIFICANCE / dims as f64;
    let times = on_grid(&ens, &CHECK_TIMES, report);
    let pairs: Vec<(f64, f64)> = CHECK_PAIRS
        .iter()
        .copied()
        .filter(|&(s, t)| ens.time_index(s).is_some() && ens.time_index(t).is_some())
        .collect();

    for (k, kernel) in kernels.iter().enumerate() {
        let name = k + 1;
        report.push(kappa_entry(&ens, k, thr.kappa4)?);
        let sd = kernel.squared_norm().sqrt();
        let normal = Normal::new(0.0, sd).map_err(|e| ExperimentError::Config(e.to_string()))?;
        let ks = ks_one_sample(&ens.terminal(k), |x| normal.cdf(x))?;
        report.push(
            DiagnosticEntry::bounded(
                format!("ks w{name}(1) vs normal"),
                ks.statistic,
                ks.critical_value(alpha),
                n,
            )
            .with_p_value(ks.p_value),
        );
        let profile = kernel.prefix_profile(&times);
        for (&t, &sf) in times.iter().zip(&profile) {
            let c = empirical_covariance(&ens, t, t, k, k)?;
            report.push(z_entry(
                format!("variance w{name}({t}) vs Sf({t}) [z]"),
                c.covariance,
                sf,
                c.standard_error,
                thr.standard_errors,
                n,
            ));
        }
        for &(s, t) in &pairs {
            let c = empirical_covariance(&ens, s, t, k, k)?;
            let sf = kernel.prefix_profile(&[s.min(t)])[0];
            report.push(z_entry(
                format!(
                    "covariance w{name}({s}) w{name}({t}) vs Sf({}) [z]",
                    s.min(t)
                ),
                c.covariance,
                sf,
                c.standard_error,
                thr.standard_errors,
                n,
            ));
        }
        if let Some(e) = cfg.kernels[k].limit_exponent() {
            report.push(time_change_entry(kernel, e, name, thr.time_change));
            let mut zs = Vec::new();
            for &t in &times {
                let c = empirical_covariance(&ens, t, t, k, k)?;
                zs.push(format!(
                    "t={t}: {:.2}",
                    (c.covariance - t.powf(e)).abs() / c.standard_error
                ));
            }
            report.notes.push(format!(
                "w{name} variance against the limit t^{e}, in standard errors (includes finite-m bias): {}",
                zs.join(", ")
            ));
        }
    }
    for k in 0..dims {
        for l in (k + 1)..dims {
            let c = empirical_covariance(&ens, 1.0, 1.0, k, l)?;
            report.push(z_entry(
                format!("covariance w{}(1) w{}(1) vs 0 [z]", k + 1, l + 1),
                c.covariance,
                0.0,
                c.standard_error,
                thr.standard_errors,
                n,
            ));
        }
    }
    report.notes.push(modulus_note(&ens, kernels, cfg.seed)?);
    report.notes.push(format!(
        "KS tests at Bonferroni level {SIGNIFICANCE}/{dims}; covariance checks at {} standard errors",
        thr.standard_errors
    ));
    report.notes.push(
        "tightness has no finite-sample test; only Gaussian marginals and cross-component independence are checked"
            .into(),
    );
    Ok(ens)
}

fn input_moment_entry(cfg: &ExperimentConfig, m: usize, bound: f64) -> DiagnosticEntry {
    let family = &cfg.family;
    let targets = family.fourth_moments(m);
    let base = stream_seed(cfg.seed, INPUT_STREAM);
    let mut x = vec![0.0; m];
    let (mut sum, mut sq) = (0.0, 0.0);
    for r in 0..cfg.replicates {
        family.sample_into(&mut rng_for(replicate_seed(base, r as u64)), &mut x);
        for (xi, t) in x.iter().zip(&targets) {
            let d = xi.powi(4) - t;
            sum += d;
            sq += d * d;
        }
    }
    let n = (cfg.replicates * m) as f64;
    let mean = sum / n;
    let se = ((sq / n - mean * mean) * n / (n - 1.0).max(1.0) / n).sqrt();
    z_entry(
        format!("input fourth moments of {} vs exact [z]", family.name()),
        mean,
        0.0,
        se,
        bound,
        cfg.replicates * m,
    )
}

fn diagnostics(
    cfg: &ExperimentConfig,
    kernels: &[SparseKernel],
    report: &mut DiagnosticReport,
) -> Result<ReplicationEnsemble, ExperimentError> {
    let ens = ensemble(cfg, kernels)?;
    let thr = &cfg.thresholds;
    let n = ens.replicates();
    let m = kernels[0].size();
    let moments = cfg.family.fourth_moments(m);
    for (k, kernel) in kernels.iter().enumerate() {
        let name = k + 1;
        report.push(DiagnosticEntry::bounded(
            format!("normalization w{name} |sum a^2 - 1|"),
            (kernel.squared_norm() - 1.0).abs(),
            NORMALIZATION_TOLERANCE,
            kernel.len(),
        ));
        let c = empirical_covariance(&ens, 1.0, 1.0, k, k)?;
        report.push(z_entry(
            format!("variance w{name}(1) vs 1 [z]"),
            c.covariance,
            1.0,
            c.standard_error,
            thr.standard_errors,
            n,
        ));
        report.push(kappa_entry(&ens, k, thr.kappa4)?);
        if let Some(e) = cfg.kernels[k].limit_exponent() {
            report.push(time_change_entry(kernel, e, name, thr.time_change));
        }
        let norms = (1..kernel.order())
            .map(|r| Ok(format!("r={r}: {:.6}", contraction_norm(kernel, r)?)))
            .collect::<Result<Vec<_>, ExperimentError>>()?;
        report.notes.push(format!(
            "w{name}: rho^2 = {:.6}, max influence = {:.6}, D rho^2 = {:.6}, contraction norms {}",
            kernel.rho_squared(),
            kernel.max_influence(),
            kernel.lindeberg_product(&moments)?,
            if norms.is_empty() {
                "none".into()
            } else {
                norms.join(", ")
            }
        ));
    }
    report.push(input_moment_entry(cfg, m, thr.standard_errors));
    Ok(ens)
}

/// Runs the Monte Carlo suite selected by `cfg.suite`.
pub fn simulate(
    cfg: &ExperimentConfig,
    config_hash: &str,
) -> Result<SimulationOutput, ExperimentError> {
    cfg.validate()?;
    let kernels = cfg.build_kernels()?;
    let mut files = OutputSet::default();
    let (report, ensembles) = match cfg.suite {
        Suite::Universality => {
            let (mut report, ensembles) = universality_report(
                &UniversalityConfig {
                    kernels,
                    families: cfg.families.clone(),
                    grid: cfg.grid(),
                    replicates: cfg.replicates,
                    seed: cfg.seed,
                    threads: None,
                    interior_times: vec![0.25, 0.5, 0.75],
                },
                config_hash,
            )?;
            for (i, f) in cfg.families.iter().enumerate() {
                report.notes.push(format!("family {i}: {}", f.name()));
            }
            (report, ensembles)
        }
        Suite::Fclt | Suite::Diagnostics => {
            let mut report = DiagnosticReport::new(config_hash, cfg.seed, cfg.replicates);
            let ens = if cfg.suite == Suite::Fclt {
                fclt(cfg, &kernels, &mut report)?
            } else {
                diagnostics(cfg, &kernels, &mut report)?
            };
            (report, vec![ens])
        }
        other => {
            return Err(ExperimentError::Config(format!(
                "simulate runs fclt, universality or diagnostics, not `{}`",
                other.name()
            )))
        }
    };
    if ensembles.len() == 1 {
        files.add_csv("terminal.csv", config_hash, &ensembles[0].terminal_csv());
        files.add_csv("summary.csv", config_hash, &ensembles[0].summary_csv());
    } else {
        for (i, e) in ensembles.iter().enumerate() {
            files.add_csv(format!("terminal_{i}.csv"), config_hash, &e.terminal_csv());
            files.add_csv(format!("summary_{i}.csv"), config_hash, &e.summary_csv());
        }
    }
    files.add("report.json", pretty_json(&report));
    files.add("report.csv", report.to_csv());
    Ok(SimulationOutput {
        report,
        ensembles,
        files,
    })
}
