//! The terminal value of a normalized homogeneous sum with small contraction
//! norms is close to standard normal: small fourth cumulant, KS test passes.

use statrs::distribution::{ContinuousCDF, Normal};
use ustat::kernel::fractional_kernel;
use ustat::sim::{monte_carlo, uniform_grid, InputFamily, MonteCarloConfig};
use ustat::stats::{fourth_cumulant, ks_one_sample};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ens = monte_carlo(&MonteCarloConfig {
        kernels: vec![fractional_kernel(3, 2, 2500)?],
        family: InputFamily::Rademacher,
        grid: uniform_grid(2),
        replicates: 5000,
        seed: 42,
        threads: None,
    })?;
    let w1 = ens.terminal(0);
    let c = fourth_cumulant(&w1)?;
    println!("kappa4 = {:.4} +- {:.4}", c.kappa4, c.standard_error);
    let phi = Normal::standard();
    let ks = ks_one_sample(&w1, |x| phi.cdf(x))?;
    println!(
        "KS D = {:.4} (1% critical {:.4}), p = {:.3}",
        ks.statistic,
        ks.critical_value(0.01),
        ks.p_value
    );
    Ok(())
}
