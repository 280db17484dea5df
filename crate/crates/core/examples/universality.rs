//! Gaussian, Rademacher and normalized Poisson inputs give statistically
//! indistinguishable marginals of the same homogeneous-sum process.

use ustat::kernel::fractional_kernel;
use ustat::sim::{uniform_grid, InputFamily};
use ustat::stats::{universality_report, UniversalityConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (report, _) = universality_report(
        &UniversalityConfig {
            kernels: vec![fractional_kernel(3, 2, 2500)?],
            families: vec![
                InputFamily::Gaussian,
                InputFamily::Rademacher,
                InputFamily::poisson(2.0),
            ],
            grid: uniform_grid(101),
            replicates: 2000,
            seed: 9,
            threads: None,
            interior_times: vec![0.25, 0.5, 0.75],
        },
        "example",
    )?;
    for e in &report.entries {
        println!(
            "{} {:<60} {:.4} <= {:.4}",
            if e.pass { "PASS" } else { "FAIL" },
            e.name,
            e.statistic,
            e.threshold
        );
    }
    println!("overall: {}", if report.passed() { "pass" } else { "fail" });
    Ok(())
}
