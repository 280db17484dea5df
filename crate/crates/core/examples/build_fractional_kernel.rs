//! Builds the order-3, arity-2 fractional product kernel on [100], prints
//! its summary numbers and round-trips it through both file formats.

use ustat::kernel::{fractional_kernel, fractional_support_count};
use ustat::SparseKernel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k = fractional_kernel(3, 2, 100)?;
    println!(
        "supports: {} (expected {})",
        k.len(),
        fractional_support_count(3, 2, 100)
    );
    println!("sum a^2 = {:.15}", k.squared_norm());
    println!(
        "rho^2 = {:.6}, max influence = {:.6}",
        k.rho_squared(),
        k.max_influence()
    );

    let text = k.to_text();
    assert_eq!(SparseKernel::from_text(&text)?, k);
    assert_eq!(SparseKernel::from_json(&k.to_json())?, k);
    println!("first lines of the text form:");
    for line in text.lines().take(4) {
        println!("  {line}");
    }
    Ok(())
}
