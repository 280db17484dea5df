//! Draws random degenerate pairs and evaluates the exact covariance identity,
//! the quadruple bound and the equality of the two quadruple sums.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ustat::quadruple::{
    check_covariance_identity, check_s0_upper_bound, random_pair, s0_value, s1_value,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (q, m, p, n) in [(2, 5, 2, 5), (1, 4, 2, 5), (2, 6, 1, 4)] {
        let pair = random_pair(q, m, p, n, &mut rng)?;
        let id = check_covariance_identity(&pair.v, &pair.w, &pair.space)?;
        println!(
            "q={q} m={m} p={p} n={n}: lhs {:.6}  rhs {:.6}  residual {:.1e}  uncorrected residual {:.1e}",
            id.lhs,
            id.rhs(),
            id.residual(),
            id.stated_residual()
        );
        let s0 = s0_value(&pair.w, &pair.w, &pair.space)?;
        let s1 = s1_value(&pair.w, &pair.w, &pair.space)?;
        let b = check_s0_upper_bound(&pair.w, &pair.space)?;
        println!(
            "  S0 {s0:.6} = S1 {s1:.6};  S0 bound margin {:.4}",
            b.margin()
        );
    }
    Ok(())
}
