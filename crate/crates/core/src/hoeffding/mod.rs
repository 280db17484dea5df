//! Exact Hoeffding decompositions over finite product spaces.
//!
//! For independent `X_1, ..., X_n` and `Y = f(X_1, ..., X_n)` the unique
//! decomposition `Y = sum_{M ⊆ [n]} Y_M` has `Y_M` measurable in
//! `(X_i, i in M)` and `E[Y_M | F_J] = 0` whenever `M ⊄ J`. Components are
//! obtained by inclusion-exclusion over conditional expectations,
//! `Y_M = sum_{J ⊆ M} (-1)^{|M|-|J|} E[Y | F_J]`.
//!
//! Everything here is exact enumeration; nothing is sampled. Index sets are
//! bitmasks with bit `i - 1` standing for coordinate `i`.

mod space;
mod table;

pub use space::{DiscreteDistribution, EngineLimits, ProductSpace, DISTRIBUTION_TOLERANCE};
pub use table::{expect_product, StatisticTable};

use thiserror::Error;

use crate::combinatorics::{mask_bits, submasks};

/// Tolerance for single exact expectations.
pub const EXPECTATION_TOLERANCE: f64 = 1e-12;
/// Tolerance for identities assembled from many expectations.
pub const IDENTITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HoeffdingError {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("table has {found} values, expected {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("index set {mask:#b} is not a subset of [{n}]")]
    BadIndexSet { mask: u32, n: usize },
    #[error("space too large for exact enumeration ({coordinates} coordinates, {atoms} atoms)")]
    TooLarge { coordinates: usize, atoms: usize },
    #[error("statistics live on different spaces")]
    SpaceMismatch,
}

/// Mask of a 1-based index set.
pub fn mask_of(indices: &[usize]) -> u32 {
    indices.iter().fold(0, |m, &i| m | (1 << (i - 1)))
}

/// 1-based indices of a mask.
pub fn indices_of(mask: u32) -> Vec<usize> {
    mask_bits(mask).map(|b| b + 1).collect()
}

/// `E[Y]`.
pub fn expectation(y: &StatisticTable, space: &ProductSpace) -> Result<f64, HoeffdingError> {
    y.check(space)?;
    Ok(y.expectation(space))
}

/// `E[Y | F_J]` as a table over the coordinates of `J`.
pub fn conditional_expectation(
    y: &StatisticTable,
    j: u32,
    space: &ProductSpace,
) -> Result<StatisticTable, HoeffdingError> {
    y.check(space)?;
    space.check_mask(j)?;
    Ok(y.condition(j, space))
}

/// `Y_M` by direct inclusion-exclusion over the subsets of `M`.
pub fn hoeffding_component(
    y: &StatisticTable,
    m: u32,
    space: &ProductSpace,
) -> Result<StatisticTable, HoeffdingError> {
    y.check(space)?;
    space.check_mask(m)?;
    let mut out = StatisticTable::zeros(m, space);
    for j in submasks(m) {
        let sign = if (m & !j).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        let term = y.condition(j, space).lift(m, space);
        out.axpy(sign, &term);
    }
    Ok(out)
}

/// A statistic together with all `2^n` of its Hoeffding components.
#[derive(Debug, Clone, PartialEq)]
pub struct DecomposedStatistic {
    n: usize,
    components: Vec<StatisticTable>,
}

impl DecomposedStatistic {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `Y_M`, stored over the coordinates of `M`.
    pub fn component(&self, m: u32) -> &StatisticTable {
        &self.components[m as usize]
    }

    pub fn components(&self) -> impl Iterator<Item = (u32, &StatisticTable)> {
        self.components
            .iter()
            .enumerate()
            .map(|(m, t)| (m as u32, t))
    }

    /// `E[Y_M^2]`.
    pub fn second_moment(&self, m: u32, space: &ProductSpace) -> f64 {
        self.component(m).second_moment(space)
    }

    /// `sum_M Y_M` as a full table.
    pub fn reconstruct(&self, space: &ProductSpace) -> StatisticTable {
        let full = space.full_mask();
        let mut out = StatisticTable::zeros(full, space);
        for c in &self.components {
            out.axpy(1.0, &c.lift(full, space));
        }
        out
    }

    /// Sizes `|M|` of components whose L2 norm is at least `tol`.
    pub fn active_orders(&self, space: &ProductSpace, tol: f64) -> Vec<usize> {
        let mut orders: Vec<usize> = self
            .components()
            .filter(|(_, c)| c.second_moment(space).sqrt() >= tol)
            .map(|(m, _)| m.count_ones() as usize)
            .collect();
        orders.sort_unstable();
        orders.dedup();
        orders
    }

    fn check(&self, space: &ProductSpace) -> Result<(), HoeffdingError> {
        if self.n != space.n() {
            return Err(HoeffdingError::SpaceMismatch);
        }
        Ok(())
    }
}

/// Full Hoeffding decomposition.
///
/// Conditional expectations for all `J` are built top-down by integrating
/// out one coordinate at a time, then turned into components by an in-place
/// Moebius transform over the subset lattice.
pub fn decompose(
    y: &StatisticTable,
    space: &ProductSpace,
) -> Result<DecomposedStatistic, HoeffdingError> {
    y.check(space)?;
    let n = space.n();
    if n > space.limits().max_coordinates {
        return Err(HoeffdingError::TooLarge {
            coordinates: n,
            atoms: space.atom_count(),
        });
    }
    let full = space.full_mask();
    let mut tables: Vec<StatisticTable> = Vec::with_capacity(1 << n);
    tables.resize(1 << n, StatisticTable::constant(0.0));
    tables[full as usize] = y.lift(full, space);
    for j in (0..full).rev() {
        let missing = (!j & full).trailing_zeros();
        let parent = j | (1 << missing);
        tables[j as usize] = tables[parent as usize].condition(j, space);
    }
    for i in 0..n {
        let bit = 1u32 << i;
        for m in 0..=full {
            if m & bit != 0 {
                let lower = tables[(m ^ bit) as usize].lift(m, space);
                tables[m as usize].axpy(-1.0, &lower);
            }
        }
    }
    Ok(DecomposedStatistic {
        n,
        components: tables,
    })
}

/// True iff every component with `|M| != p` has L2 norm below
/// [`IDENTITY_TOLERANCE`].
pub fn is_degenerate(
    y: &StatisticTable,
    space: &ProductSpace,
    order: usize,
) -> Result<bool, HoeffdingError> {
    let d = decompose(y, space)?;
    Ok(is_degenerate_decomposed(&d, space, order))
}

pub(crate) fn is_degenerate_decomposed(
    d: &DecomposedStatistic,
    space: &ProductSpace,
    order: usize,
) -> bool {
    d.components()
        .filter(|(m, _)| m.count_ones() as usize != order)
        .all(|(_, c)| c.second_moment(space).sqrt() < IDENTITY_TOLERANCE)
}

/// `Var(U_M(V, W))` for every `M`, where `VW = sum_M U_M(V, W)`; indexed by
/// mask.
pub fn product_component_variances(
    v: &DecomposedStatistic,
    w: &DecomposedStatistic,
    space: &ProductSpace,
) -> Result<Vec<f64>, HoeffdingError> {
    v.check(space)?;
    w.check(space)?;
    let vw = v.reconstruct(space).mul(&w.reconstruct(space), space);
    let d = decompose(&vw, space)?;
    Ok(d.components()
        .map(|(_, c)| {
            let mean = c.expectation(space);
            c.second_moment(space) - mean * mean
        })
        .collect())
}

#[cfg(test)]
mod tests;
