use std::time::Instant;

use ustat::kernel::{contraction_norm, fractional_kernel};

/// Contraction norms of the fractional kernel shrink as `m` grows.
fn main() -> Result<(), Box<dyn std::error::Error>> {
    for m in [100, 1_000, 10_000] {
        let k = fractional_kernel(3, 2, m)?;
        let start = Instant::now();
        let r1 = contraction_norm(&k, 1)?;
        let r2 = contraction_norm(&k, 2)?;
        println!(
            "m={m:>6}  supports {:>6}  |f*1f| {r1:.6}  |f*2f| {r2:.6}  ({:.2?})",
            k.len(),
            start.elapsed()
        );
    }
    Ok(())
}
