//! Fractional cartesian product kernels.
//!
//! Fix `p >= 3` and an arity `2 <= a <= p - 1`. With `K = floor(m^{1/a})`,
//! every strictly increasing `t = (t_1 < ... < t_p)` in `[K]` is mapped to the
//! support `{phi(t|S_1), ..., phi(t|S_p)}` where `S_1, ..., S_p` are the
//! cyclic windows `{i, i+1, ..., i+a-1 mod p}` and `phi` is an injective
//! shell-preserving map `N^a -> N`. All supports share the coefficient
//! `|F0|^{-1/2}`, so the kernel is normalized and its prefix variance behaves
//! like `t^{p/a}`.

use super::{KernelError, SparseKernel};
use crate::combinatorics::{binomial, factorial, integer_root, Combinations};

fn pow_u128(base: u128, exp: usize) -> Option<u128> {
    (0..exp).try_fold(1u128, |acc, _| acc.checked_mul(base))
}

/// Injective map `N^a -> N` with `phi([k]^a) ⊆ [k^a]` and shell
/// `[k]^a \ [k-1]^a` sent onto `((k-1)^a, k^a]`. Inside a shell, tuples are
/// numbered consecutively in lexicographic order.
pub fn phi_map(tuple: &[u64]) -> Result<u64, KernelError> {
    let a = tuple.len();
    if a == 0 || tuple.contains(&0) {
        return Err(KernelError::NonPositiveEntry);
    }
    let overflow = || KernelError::Overflow;
    let k = u128::from(*tuple.iter().max().expect("nonempty"));
    let full = |rem: usize| pow_u128(k, rem);
    let inner = |rem: usize| pow_u128(k - 1, rem);
    let mut rank: u128 = 0;
    let mut prefix_max: u128 = 0;
    for (i, &ti) in tuple.iter().enumerate() {
        let ti = u128::from(ti);
        let rem = a - i - 1;
        // completions of a prefix ending in some v < t_i that keep max == k
        let completions = if prefix_max == k {
            full(rem).ok_or_else(overflow)?
        } else {
            full(rem).ok_or_else(overflow)? - inner(rem).ok_or_else(overflow)?
        };
        rank += (ti - 1) * completions;
        prefix_max = prefix_max.max(ti);
    }
    let base = pow_u128(k - 1, a).ok_or_else(overflow)?;
    u64::try_from(base + rank + 1).map_err(|_| overflow())
}

/// Cyclic windows `S_i = {i, ..., i+a-1 mod p}` as sorted 0-based positions.
/// Each position lies in exactly `a` windows.
pub fn window_family(order: usize, arity: usize) -> Vec<Vec<usize>> {
    (0..order)
        .map(|i| {
            let mut w: Vec<usize> = (0..arity).map(|j| (i + j) % order).collect();
            w.sort_unstable();
            w
        })
        .collect()
}

fn validate(order: usize, arity: usize, size: usize) -> Result<u64, KernelError> {
    if order < 3 || arity < 2 || arity > order - 1 {
        return Err(KernelError::InvalidArity { order, arity });
    }
    let bound = (order as u64).checked_pow(arity as u32).unwrap_or(u64::MAX);
    if (size as u64) <= bound {
        return Err(KernelError::TooSmall { size, bound });
    }
    Ok(integer_root(size as u64, arity as u32))
}

fn support_of(t: &[usize], windows: &[Vec<usize>]) -> Result<Vec<usize>, KernelError> {
    windows
        .iter()
        .map(|w| {
            let sub: Vec<u64> = w.iter().map(|&pos| t[pos] as u64).collect();
            phi_map(&sub).map(|v| v as usize)
        })
        .collect()
}

/// The normalized fractional-product kernel of order `p`, arity `a` on `[m]`.
///
/// Each support carries `a_J = p! (p! |F_m|)^{-1/2} = |F0_m|^{-1/2}` where
/// `|F_m| = p! |F0_m|` counts the symmetrized support tuples.
pub fn fractional_kernel(
    order: usize,
    arity: usize,
    size: usize,
) -> Result<SparseKernel, KernelError> {
    let side = validate(order, arity, size)? as usize;
    let windows = window_family(order, arity);
    let count = binomial(side as u64, order as u64);
    let coeff = (count as f64).sqrt().recip();
    let entries = Combinations::new(side, order)
        .map(|t| support_of(&t, &windows).map(|set| (set, coeff)))
        .collect::<Result<Vec<_>, _>>()?;
    SparseKernel::new(order, size, entries)
}

/// `|F0_m| = C(floor(m^{1/a}), p)`; 0 when `m <= p^a`.
pub fn fractional_support_count(order: usize, arity: usize, size: usize) -> u64 {
    match validate(order, arity, size) {
        Ok(side) => binomial(side, order as u64),
        Err(_) => 0,
    }
}

/// `|F0_m ∩ [l]^p|`: supports of the size-`m` construction whose entries are
/// all at most `l`.
pub fn fractional_prefix_count(
    order: usize,
    arity: usize,
    size: usize,
    limit: usize,
) -> Result<u64, KernelError> {
    let side = validate(order, arity, size)? as usize;
    let windows = window_family(order, arity);
    let mut count = 0u64;
    for t in Combinations::new(side, order) {
        let set = support_of(&t, &windows)?;
        if set.iter().all(|&i| i <= limit) {
            count += 1;
        }
    }
    Ok(count)
}

/// Empirical `b` in `|F_m| ~ b m^{p/a}`, i.e. `p! |F0_m| / m^{p/a}`.
pub fn fractional_density_constant(order: usize, arity: usize, size: usize) -> f64 {
    let f = factorial(order) * fractional_support_count(order, arity, size) as f64;
    f / (size as f64).powf(order as f64 / arity as f64)
}
