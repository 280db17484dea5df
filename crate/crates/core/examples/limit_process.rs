use ustat::kernel::fractional_kernel;
use ustat::sim::{
    monte_carlo, power_time_change, sample_limit_path, uniform_grid, InputFamily, MonteCarloConfig,
};
use ustat::stats::{empirical_covariance, modulus_of_continuity};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kernel = fractional_kernel(3, 2, 10_000)?;
    let grid = uniform_grid(21);
    let ens = monte_carlo(&MonteCarloConfig {
        kernels: vec![kernel.clone()],
        family: InputFamily::Gaussian,
        grid: grid.clone(),
        replicates: 2000,
        seed: 3,
        threads: None,
    })?;
    println!("   t   Var(W_t)     Sf(t)    t^1.5");
    for t in [0.25, 0.5, 0.75, 1.0] {
        let c = empirical_covariance(&ens, t, t, 0, 0)?;
        println!(
            "{t:>4}   {:.4}+-{:.4}  {:.4}   {:.4}",
            c.covariance,
            c.standard_error,
            kernel.prefix_profile(&[t])[0],
            t.powf(1.5)
        );
    }
    let c = empirical_covariance(&ens, 0.25, 0.75, 0, 0)?;
    println!(
        "Cov(W_0.25, W_0.75) = {:.4} +- {:.4}",
        c.covariance, c.standard_error
    );

    let v = power_time_change(1.5, &grid);
    let (mut emp, mut lim) = (0.0, 0.0);
    for r in 0..200 {
        emp += modulus_of_continuity(&ens.path(r), 0.1)?;
        lim += modulus_of_continuity(
            &sample_limit_path(std::slice::from_ref(&v), &grid, r as u64)?,
            0.1,
        )?;
    }
    println!(
        "mean modulus at delta 0.1: simulated {:.3}, limit {:.3}",
        emp / 200.0,
        lim / 200.0
    );
    Ok(())
}
