//! Sparse symmetric kernels of homogeneous sums.
//!
//! A homogeneous sum of order `p` over `m` inputs is
//! `W = sum_J a_J prod_{i in J} X_i`, the sum running over `p`-subsets `J` of
//! `[m]`. [`SparseKernel`] stores the nonzero part of `{a_J}` keyed by
//! strictly increasing index tuples, so the kernel vanishes on diagonals by
//! construction. The symmetric point function `f(i_1, ..., i_p) = a_J / p!`
//! is derived on demand and never stored.

mod contraction;
mod fractional;
mod io;

pub use contraction::{contraction, contraction_norm, ContractionTable};
pub use fractional::{
    fractional_density_constant, fractional_kernel, fractional_prefix_count,
    fractional_support_count, phi_map, window_family,
};

use std::cmp::Ordering;

use thiserror::Error;

use crate::combinatorics::factorial;

/// Absolute tolerance for normalization checks.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("order {order} is invalid for size {size} (need 1 <= p <= m)")]
    InvalidOrder { order: usize, size: usize },
    #[error("key {key:?} has length {found}, expected {expected}")]
    KeyLength {
        key: Vec<usize>,
        expected: usize,
        found: usize,
    },
    #[error("index {index} in key {key:?} is outside [1, {size}]")]
    KeyOutOfRange {
        key: Vec<usize>,
        index: usize,
        size: usize,
    },
    #[error("key {0:?} repeats an index")]
    DiagonalKey(Vec<usize>),
    #[error("key {0:?} appears more than once")]
    DuplicateKey(Vec<usize>),
    #[error("coefficient for key {0:?} is not finite")]
    NonFinite(Vec<usize>),
    #[error("kernel has zero squared norm")]
    ZeroKernel,
    #[error("index {index} is outside [{lower}, {size}]")]
    IndexOutOfRange {
        index: usize,
        lower: usize,
        size: usize,
    },
    #[error("contraction depth {depth} is outside [1, {max}]")]
    DepthOutOfRange { depth: usize, max: usize },
    #[error("integer overflow in index map")]
    Overflow,
    #[error("tuple entries must be positive")]
    NonPositiveEntry,
    #[error("arity {arity} is invalid for order {order} (need 2 <= a <= p - 1)")]
    InvalidArity { order: usize, arity: usize },
    #[error("size {size} is too small: need m > p^a = {bound}")]
    TooSmall { size: usize, bound: u64 },
    #[error("fourth moment {value} at index {index} is below 1")]
    MomentBelowOne { index: usize, value: f64 },
    #[error("expected {expected} values, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Order-`p` symmetric coefficient family `{a_J}` over `p`-subsets of `[m]`.
///
/// Supports are stored in colexicographic order (ordered by largest index
/// first, then by the next largest, ...). Every summation over supports runs
/// in this order, which makes the prefix sums behind the empirical process
/// agree bitwise with the full sum.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseKernel {
    order: usize,
    size: usize,
    indices: Vec<u32>,
    coeffs: Vec<f64>,
}

fn colex_cmp(a: &[u32], b: &[u32]) -> Ordering {
    a.iter().rev().cmp(b.iter().rev())
}

impl SparseKernel {
    /// Builds a kernel from `(index set, coefficient)` pairs.
    ///
    /// Index sets may be given in any order; they are sorted. A repeated
    /// index inside one key is a [`KernelError::DiagonalKey`], a key given
    /// twice a [`KernelError::DuplicateKey`].
    pub fn new<I>(order: usize, size: usize, entries: I) -> Result<Self, KernelError>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        if order == 0 || size < order || size > u32::MAX as usize {
            return Err(KernelError::InvalidOrder { order, size });
        }
        let mut rows: Vec<(Vec<u32>, f64)> = Vec::new();
        for (mut key, value) in entries {
            if key.len() != order {
                return Err(KernelError::KeyLength {
                    found: key.len(),
                    key,
                    expected: order,
                });
            }
            if let Some(&bad) = key.iter().find(|&&i| i == 0 || i > size) {
                return Err(KernelError::KeyOutOfRange {
                    key,
                    index: bad,
                    size,
                });
            }
            if !value.is_finite() {
                return Err(KernelError::NonFinite(key));
            }
            key.sort_unstable();
            if key.windows(2).any(|w| w[0] == w[1]) {
                return Err(KernelError::DiagonalKey(key));
            }
            rows.push((key.into_iter().map(|i| i as u32).collect(), value));
        }
        rows.sort_by(|a, b| colex_cmp(&a.0, &b.0));
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(KernelError::DuplicateKey(
                w[0].0.iter().map(|&i| i as usize).collect(),
            ));
        }
        let mut indices = Vec::with_capacity(rows.len() * order);
        let mut coeffs = Vec::with_capacity(rows.len());
        for (key, value) in rows {
            indices.extend_from_slice(&key);
            coeffs.push(value);
        }
        Ok(Self {
            order,
            size,
            indices,
            coeffs,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of stored supports.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Stored `(J, a_J)` pairs in colexicographic order of `J`.
    pub fn supports(&self) -> impl ExactSizeIterator<Item = (&[u32], f64)> + '_ {
        self.indices
            .chunks_exact(self.order)
            .zip(self.coeffs.iter().copied())
    }

    /// `a_J` for an index set given in any order; 0 when `J` is not stored
    /// or is not a valid `p`-subset.
    pub fn coefficient(&self, set: &[usize]) -> f64 {
        if set.len() != self.order {
            return 0.0;
        }
        let mut key: Vec<u32> = set.iter().map(|&i| i as u32).collect();
        key.sort_unstable();
        if key.windows(2).any(|w| w[0] == w[1]) {
            return 0.0;
        }
        let n = self.len();
        let (mut lo, mut hi) = (0usize, n);
        while lo < hi {
            let mid = (lo + hi) / 2;
            let probe = &self.indices[mid * self.order..(mid + 1) * self.order];
            match colex_cmp(probe, &key) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return self.coeffs[mid],
            }
        }
        0.0
    }

    /// Symmetric point function `f(i_1, ..., i_p) = a_{{i_1..i_p}} / p!`,
    /// zero when two arguments coincide.
    pub fn point_value(&self, tuple: &[usize]) -> f64 {
        self.coefficient(tuple) / factorial(self.order)
    }

    /// `sum_J a_J^2`, the variance of the homogeneous sum for standardized
    /// inputs.
    pub fn squared_norm(&self) -> f64 {
        self.coeffs.iter().map(|a| a * a).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.squared_norm() - 1.0).abs() <= NORMALIZATION_TOLERANCE
    }

    /// Rescales to unit squared norm, preserving coefficient ratios.
    pub fn normalize(&self) -> Result<Self, KernelError> {
        let norm2 = self.squared_norm();
        if norm2 <= 0.0 {
            return Err(KernelError::ZeroKernel);
        }
        if (norm2 - 1.0).abs() <= f64::EPSILON {
            return Ok(self.clone());
        }
        let scale = norm2.sqrt().recip();
        Ok(Self {
            coeffs: self.coeffs.iter().map(|a| a * scale).collect(),
            ..self.clone()
        })
    }

    /// Per-index variance mass `sum_{J ∋ i} a_J^2`, indexed `0..m` for
    /// coordinates `1..=m`.
    pub fn index_mass(&self) -> Vec<f64> {
        let mut mass = vec![0.0; self.size];
        for (set, a) in self.supports() {
            for &i in set {
                mass[i as usize - 1] += a * a;
            }
        }
        mass
    }

    /// Influence `Inf_i(f) = (1/p!^2) sum_{J ∋ i} a_J^2` of coordinate `i`.
    pub fn influence(&self, i: usize) -> Result<f64, KernelError> {
        if i == 0 || i > self.size {
            return Err(KernelError::IndexOutOfRange {
                index: i,
                lower: 1,
                size: self.size,
            });
        }
        let mass: f64 = self
            .supports()
            .filter(|(set, _)| set.contains(&(i as u32)))
            .map(|(_, a)| a * a)
            .sum();
        let pf = factorial(self.order);
        Ok(mass / (pf * pf))
    }

    /// `max_i Inf_i(f)`.
    pub fn max_influence(&self) -> f64 {
        let pf = factorial(self.order);
        self.rho_squared() / (pf * pf)
    }

    /// `rho^2 = max_i sum_{J ∋ i} a_J^2`.
    pub fn rho_squared(&self) -> f64 {
        self.index_mass().into_iter().fold(0.0, f64::max)
    }

    /// `sigma^2(j) = sum_{J ⊆ [j]} a_J^2`.
    pub fn sigma_sq_prefix(&self, j: usize) -> Result<f64, KernelError> {
        if j > self.size {
            return Err(KernelError::IndexOutOfRange {
                index: j,
                lower: 0,
                size: self.size,
            });
        }
        Ok(self
            .supports()
            .take_while(|(set, _)| set[self.order - 1] as usize <= j)
            .map(|(_, a)| a * a)
            .sum())
    }

    /// `Sf(t) = sigma^2(floor(m t))` for each `t` of `times` (in `[0, 1]`,
    /// any order).
    pub fn prefix_profile(&self, times: &[f64]) -> Vec<f64> {
        times
            .iter()
            .map(|&t| {
                let cut = crate::sim::grid_cut(self.size, t);
                self.sigma_sq_prefix(cut).unwrap_or(0.0)
            })
            .collect()
    }

    /// `D = max_{J: a_J != 0} prod_{i in J} E[X_i^4]`, the worst per-support
    /// kurtosis ratio of a homogeneous sum. `fourth_moments[i - 1]` holds
    /// `E[X_i^4]`.
    pub fn d_factor(&self, fourth_moments: &[f64]) -> Result<f64, KernelError> {
        if fourth_moments.len() < self.size {
            return Err(KernelError::LengthMismatch {
                expected: self.size,
                found: fourth_moments.len(),
            });
        }
        if let Some((index, &value)) = fourth_moments
            .iter()
            .enumerate()
            .find(|(_, &v)| v.is_nan() || v < 1.0)
        {
            return Err(KernelError::MomentBelowOne {
                index: index + 1,
                value,
            });
        }
        Ok(self
            .supports()
            .filter(|(_, a)| *a != 0.0)
            .map(|(set, _)| {
                set.iter()
                    .map(|&i| fourth_moments[i as usize - 1])
                    .product::<f64>()
            })
            .fold(1.0, f64::max))
    }

    /// `D * rho^2`, the quantity the reinforced Lindeberg condition sends to 0.
    pub fn lindeberg_product(&self, fourth_moments: &[f64]) -> Result<f64, KernelError> {
        Ok(self.d_factor(fourth_moments)? * self.rho_squared())
    }

    /// Applies a relabeling `i -> perm[i - 1]` of `[m]`; `perm` must be a
    /// permutation of `1..=m`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self, KernelError> {
        if perm.len() != self.size {
            return Err(KernelError::LengthMismatch {
                expected: self.size,
                found: perm.len(),
            });
        }
        Self::new(
            self.order,
            self.size,
            self.supports()
                .map(|(set, a)| (set.iter().map(|&i| perm[i as usize - 1]).collect(), a)),
        )
    }
}

/// Random kernel: each `p`-subset of `[m]` is kept with probability
/// `density` and gets a standard normal coefficient; the result is
/// normalized.
pub fn random_kernel<R: rand::Rng + ?Sized>(
    order: usize,
    size: usize,
    density: f64,
    rng: &mut R,
) -> Result<SparseKernel, KernelError> {
    use crate::combinatorics::Combinations;
    let mut entries = Vec::new();
    for set in Combinations::new(size, order) {
        if rng.random::<f64>() < density {
            entries.push((set, crate::sim::standard_normal(rng)));
        }
    }
    SparseKernel::new(order, size, entries)?.normalize()
}
