//! Bifold quadruple sets and the exact fourth-order checks built on them.
//!
//! For a degenerate `V` of order `q` on `[m]` and a degenerate `W` of order
//! `p` on `[n]`, the set `S0` collects quadruples `(I, J, K, L)` in
//! `D_q(m)^2 x D_p(n)^2` with
//!
//! 1. `I ∩ K = J ∩ L = ∅`,
//! 2. `∅ ≠ I ∩ J = I \ (I ∩ L) ≠ I`,
//! 3. `∅ ≠ J ∩ I = J \ (J ∩ K) ≠ J`,
//! 4. `∅ ≠ K ∩ J = K \ (L ∩ K) ≠ K`,
//! 5. `∅ ≠ L ∩ I = L \ (L ∩ K) ≠ L`,
//!
//! and `S1` collects quadruples in `D_p(m ∧ n)^4` with
//!
//! 1. `I ∩ J = K ∩ L = ∅`,
//! 2. `∅ ≠ I ∩ K = I \ (I ∩ L) ≠ I`,
//! 3. `∅ ≠ J ∩ K = J \ (J ∩ L) ≠ J`,
//! 4. `∅ ≠ K ∩ J = K \ (I ∩ K) ≠ K`,
//! 5. `∅ ≠ L ∩ I = L \ (L ∩ J) ≠ L`.
//!
//! `S0(V, W)` and `S1(V, W)` sum `E[V_I V_J W_K W_L]` over these sets. Index
//! sets are bitmasks with bit `i - 1` for index `i`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinatorics::{binomial, subset_masks};
use crate::hoeffding::{
    decompose, expect_product, is_degenerate_decomposed, product_component_variances,
    DecomposedStatistic, DiscreteDistribution, HoeffdingError, ProductSpace, StatisticTable,
};
use crate::kernel::{random_kernel, KernelError, SparseKernel};

/// Tolerance for the brute-force identities and inequalities.
pub const VIOLATION_TOLERANCE: f64 = 1e-9;

/// Cap on `C(m,q)^2 C(n,p)^2` candidate quadruples.
pub const ENUMERATION_CAP: f64 = 1e8;

#[derive(Debug, Error)]
pub enum QuadrupleError {
    #[error("enumeration would visit {0:.3e} candidate quadruples")]
    TooLarge(f64),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("statistic is not degenerate of order {order} on [{size}]")]
    NotDegenerate { order: usize, size: usize },
    #[error("case {case:?} needs {requirement}")]
    CaseMismatch {
        case: LemmaCase,
        requirement: &'static str,
    },
    #[error(transparent)]
    Hoeffding(#[from] HoeffdingError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadrupleKind {
    S0,
    S1,
}

/// An enumerated `S0` or `S1`, quadruples in lexicographic mask order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadrupleSet {
    pub kind: QuadrupleKind,
    pub m: usize,
    pub n: usize,
    pub q: usize,
    pub p: usize,
    pub quads: Vec<[u32; 4]>,
}

impl QuadrupleSet {
    pub fn len(&self) -> usize {
        self.quads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quads.is_empty()
    }
}

fn proper_nonempty(part: u32, whole: u32) -> bool {
    part != 0 && part != whole
}

/// Conditions (i)-(v) of `S0`, on masks.
pub fn satisfies_s0(i: u32, j: u32, k: u32, l: u32) -> bool {
    i & k == 0
        && j & l == 0
        && proper_nonempty(i & j, i)
        && i & j == i & !(i & l)
        && proper_nonempty(j & i, j)
        && j & i == j & !(j & k)
        && proper_nonempty(k & j, k)
        && k & j == k & !(l & k)
        && proper_nonempty(l & i, l)
        && l & i == l & !(l & k)
}

/// Conditions (i)-(v) of `S1`, on masks.
pub fn satisfies_s1(i: u32, j: u32, k: u32, l: u32) -> bool {
    i & j == 0
        && k & l == 0
        && proper_nonempty(i & k, i)
        && i & k == i & !(i & l)
        && proper_nonempty(j & k, j)
        && j & k == j & !(j & l)
        && proper_nonempty(k & j, k)
        && k & j == k & !(i & k)
        && proper_nonempty(l & i, l)
        && l & i == l & !(l & j)
}

/// Every element of `I ∪ J ∪ K ∪ L` lies in exactly two of the sets.
pub fn is_bifold([i, j, k, l]: [u32; 4]) -> bool {
    // multiplicity is even everywhere and never four
    i ^ j ^ k ^ l == 0 && i & j & k & l == 0
}

fn check_params(size: usize, order: usize, what: &str) -> Result<(), QuadrupleError> {
    if order == 0 || order > size || size > 30 {
        return Err(QuadrupleError::InvalidParameters(format!(
            "{what}: need 1 <= order <= size <= 30, got order {order}, size {size}"
        )));
    }
    Ok(())
}

fn guard(a: u64, b: u64) -> Result<(), QuadrupleError> {
    let total = (a as f64).powi(2) * (b as f64).powi(2);
    if total > ENUMERATION_CAP {
        return Err(QuadrupleError::TooLarge(total));
    }
    Ok(())
}

fn enumerate(
    left: &[u32],
    right: &[u32],
    accept: impl Fn(u32, u32, u32, u32) -> bool + Sync,
) -> Vec<[u32; 4]> {
    left.par_iter()
        .map(|&i| {
            let mut out = Vec::new();
            for &j in left {
                for &k in right {
                    for &l in right {
                        if accept(i, j, k, l) {
                            out.push([i, j, k, l]);
                        }
                    }
                }
            }
            out
        })
        .collect::<Vec<_>>()
        .concat()
}

/// `S0` for `V` of order `q` on `[m]` and `W` of order `p` on `[n]`.
pub fn enumerate_s0(
    m: usize,
    n: usize,
    q: usize,
    p: usize,
) -> Result<QuadrupleSet, QuadrupleError> {
    check_params(m, q, "V")?;
    check_params(n, p, "W")?;
    guard(binomial(m as u64, q as u64), binomial(n as u64, p as u64))?;
    let quads = enumerate(&subset_masks(m, q), &subset_masks(n, p), satisfies_s0);
    Ok(QuadrupleSet {
        kind: QuadrupleKind::S0,
        m,
        n,
        q,
        p,
        quads,
    })
}

/// `S1` over `D_p(m ∧ n)^4`.
pub fn enumerate_s1(m: usize, n: usize, p: usize) -> Result<QuadrupleSet, QuadrupleError> {
    let side = m.min(n);
    check_params(side, p, "S1")?;
    let c = binomial(side as u64, p as u64);
    guard(c, c)?;
    let masks = subset_masks(side, p);
    let quads = enumerate(&masks, &masks, satisfies_s1);
    Ok(QuadrupleSet {
        kind: QuadrupleKind::S1,
        m,
        n,
        q: p,
        p,
        quads,
    })
}

/// A statistic verified to be degenerate of order `order` with every
/// component supported inside `[size]`.
#[derive(Debug, Clone)]
pub struct DegenerateStatistic {
    decomposition: DecomposedStatistic,
    full: StatisticTable,
    order: usize,
    size: usize,
}

impl DegenerateStatistic {
    pub fn new(
        y: &StatisticTable,
        order: usize,
        size: usize,
        space: &ProductSpace,
    ) -> Result<Self, QuadrupleError> {
        let decomposition = decompose(y, space)?;
        Self::from_decomposition(decomposition, order, size, space)
    }

    pub fn from_decomposition(
        decomposition: DecomposedStatistic,
        order: usize,
        size: usize,
        space: &ProductSpace,
    ) -> Result<Self, QuadrupleError> {
        if decomposition.n() != space.n() {
            return Err(HoeffdingError::SpaceMismatch.into());
        }
        check_params(size, order, "statistic")?;
        let inside = if size >= 32 {
            u32::MAX
        } else {
            (1u32 << size) - 1
        };
        let outside_ok = decomposition
            .components()
            .filter(|(m, _)| m & !inside != 0)
            .all(|(_, c)| c.second_moment(space).sqrt() < crate::hoeffding::IDENTITY_TOLERANCE);
        if size > space.n()
            || !outside_ok
            || !is_degenerate_decomposed(&decomposition, space, order)
        {
            return Err(QuadrupleError::NotDegenerate { order, size });
        }
        let full = decomposition.reconstruct(space);
        Ok(Self {
            decomposition,
            full,
            order,
            size,
        })
    }

    /// The homogeneous sum of `kernel` over the coordinates of `space`.
    pub fn from_kernel(
        kernel: &SparseKernel,
        space: &ProductSpace,
    ) -> Result<Self, QuadrupleError> {
        let y = StatisticTable::from_fn(space, |x| {
            kernel
                .supports()
                .map(|(set, a)| a * set.iter().map(|&i| x[i as usize - 1]).product::<f64>())
                .sum()
        });
        Self::new(&y, kernel.order(), kernel.size(), space)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn decomposition(&self) -> &DecomposedStatistic {
        &self.decomposition
    }

    pub fn table(&self) -> &StatisticTable {
        &self.full
    }

    fn component(&self, mask: u32) -> &StatisticTable {
        self.decomposition.component(mask)
    }

    fn energy(&self, mask: u32, space: &ProductSpace) -> f64 {
        self.component(mask).second_moment(space)
    }

    /// `sum_{J ⊆ [l]} E[Y_J^2]`.
    pub fn sigma_sq(&self, l: usize, space: &ProductSpace) -> f64 {
        subset_masks(l.min(self.size), self.order)
            .into_iter()
            .map(|m| self.energy(m, space))
            .sum()
    }

    /// `max_{i <= l} sum_{i ∈ J ⊆ [l]} E[Y_J^2]`.
    pub fn rho_sq(&self, l: usize, space: &ProductSpace) -> f64 {
        let l = l.min(self.size);
        let masks = subset_masks(l, self.order);
        (0..l)
            .map(|i| {
                masks
                    .iter()
                    .filter(|&&m| m & (1 << i) != 0)
                    .map(|&m| self.energy(m, space))
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

fn same_space(
    v: &DegenerateStatistic,
    w: &DegenerateStatistic,
    space: &ProductSpace,
) -> Result<(), QuadrupleError> {
    if v.decomposition.n() != space.n() || w.decomposition.n() != space.n() {
        return Err(HoeffdingError::SpaceMismatch.into());
    }
    Ok(())
}

fn quad_expectation(
    v: &DegenerateStatistic,
    w: &DegenerateStatistic,
    [i, j, k, l]: [u32; 4],
    space: &ProductSpace,
) -> f64 {
    expect_product(
        &[
            v.component(i),
            v.component(j),
            w.component(k),
            w.component(l),
        ],
        space,
    )
}

fn sum_over(
    v: &DegenerateStatistic,
    w: &DegenerateStatistic,
    set: &QuadrupleSet,
    space: &ProductSpace,
) -> f64 {
    set.quads
        .iter()
        .map(|&quad| quad_expectation(v, w, quad, space))
        .sum()
}

/// `S0(V, W)`.
pub fn s0_value(
    v: &DegenerateStatistic,
    w: &DegenerateStatistic,
    space: &ProductSpace,
) -> Result<f64, QuadrupleError> {
    same_space(v, w, space)?;
    let set = enumerate_s0(v.size, w.size, v.order, w.order)?;
    Ok(sum_over(v, w, &set, space))
}

/// `S1(V, W)`, quadruples of `W`'s order.
pub fn s1_value(
    v: &DegenerateStatistic,
    w: &DegenerateStatistic,
    space: &ProductSpace,
) -> Result<f64, QuadrupleError> {
    same_space(v, w, space)?;
    let set = enumerate_s1(v.size, w.size, w.order)?;
    Ok(sum_over(v, w, &set, space))
}

/// Both sides of the covariance identity for `sum_{|M| <= p+q-1} Var U_M(V, W)`.
///
/// `rhs_stated` is
///
/// ```text
/// Cov(V^2, W^2) + E[V^2]E[W^2] - E[VW]^2 - sum_{I∩K=∅} E[V_I^2]E[W_K^2]
///   - S0(V, W) - δ_{pq} sum_{I∩K=∅} E[V_I W_I]E[V_K W_K]
/// ```
///
/// `nested` sums `E[V_I V_J W_K W_L]` over the bifold quadruples with
/// `I ∩ K = J ∩ L = ∅` that are neither diagonal (`I = J`, `K = L`), nor
/// crossed (`p = q`, `I = L`, `J = K`), nor in `S0`; the identity that holds
/// for every pair of orders is `lhs = rhs_stated - nested`. When `p = q` the
/// nested sum vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs_stated: f64,
    pub nested: f64,
}

impl IdentityCheck {
    pub fn rhs(&self) -> f64 {
        self.rhs_stated - self.nested
    }

    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs()).abs()
    }

    pub fn stated_residual(&self) -> f64 {
        (self.lhs - self.rhs_stated).abs()
    }

    pub fn holds(&self) -> bool {
        self.residual() < VIOLATION_TOLERANCE
    }

    pub fn stated_holds(&self) -> bool {
        self.stated_residual() < VIOLATION_TOLERANCE
    }
}

pub fn check_covariance_identity(
    v: &DegenerateStatistic,
    w: &DegenerateStatistic,
    space: &ProductSpace,
) -> Result<IdentityCheck, QuadrupleError> {
    same_space(v, w, space)?;
    let (q, p) = (v.order, w.order);
    let vars = product_component_variances(&v.decomposition, &w.decomposition, space)?;
    let lhs: f64 = vars
        .iter()
        .enumerate()
        .filter(|(m, _)| ((*m as u32).count_ones() as usize) < p + q)
        .map(|(_, x)| x)
        .sum();

    let (vt, wt) = (&v.full, &w.full);
    let v2 = vt.mul(vt, space);
    let w2 = wt.mul(wt, space);
    let ev2 = v2.expectation(space);
    let ew2 = w2.expectation(space);
    let ev2w2 = expect_product(&[&v2, &w2], space);
    let evw = expect_product(&[vt, wt], space);

    let vi = subset_masks(v.size, q);
    let wk = subset_masks(w.size, p);
    let mut disjoint_energy = 0.0;
    for &i in &vi {
        let e = v.energy(i, space);
        for &k in &wk {
            if i & k == 0 {
                disjoint_energy += e * w.energy(k, space);
            }
        }
    }

    let mut crossed = 0.0;
    if p == q {
        let common = subset_masks(v.size.min(w.size), p);
        let mixed: Vec<f64> = common
            .iter()
            .map(|&i| expect_product(&[v.component(i), w.component(i)], space))
            .collect();
        for (a, &i) in common.iter().enumerate() {
            for (b, &k) in common.iter().enumerate() {
                if i & k == 0 {
                    crossed += mixed[a] * mixed[b];
                }
            }
        }
    }

    let s0 = s0_value(v, w, space)?;
    let rhs_stated = (ev2w2 - ev2 * ew2) + ev2 * ew2 - evw * evw - disjoint_energy - s0 - crossed;

    let mut nested = 0.0;
    for &i in &vi {
        for &j in &vi {
            for &k in &wk {
                if i & k != 0 {
                    continue;
                }
                for &l in &wk {
                    if j & l != 0 || !is_bifold([i, j, k, l]) {
                        continue;
                    }
                    if (i == j && k == l)
                        || (p == q && i == l && j == k)
                        || satisfies_s0(i, j, k, l)
                    {
                        continue;
                    }
                    nested += quad_expectation(v, w, [i, j, k, l], space);
                }
            }
        }
    }

    Ok(IdentityCheck {
        lhs,
        rhs_stated,
        nested,
    })
}

/// An inequality `value <= bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub value: f64,
    pub bound: f64,
}

impl BoundCheck {
    pub fn margin(&self) -> f64 {
        self.bound - self.value
    }

    pub fn holds(&self) -> bool {
        self.value <= self.bound + VIOLATION_TOLERANCE
    }
}

/// `S0(W, W) <= E[W^4] - 3σ^4 + 2pσ^2ρ^2`.
pub fn check_s0_upper_bound(
    w: &DegenerateStatistic,
    space: &ProductSpace,
) -> Result<BoundCheck, QuadrupleError> {
    let s0 = s0_value(w, w, space)?;
    let w2 = w.full.mul(&w.full, space);
    let fourth = w2.second_moment(space);
    let sigma2 = w.sigma_sq(w.size, space);
    let rho2 = w.rho_sq(w.size, space);
    let p = w.order as f64;
    Ok(BoundCheck {
        value: s0,
        bound: fourth - 3.0 * sigma2 * sigma2 + 2.0 * p * sigma2 * rho2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LemmaCase {
    /// Equal orders.
    I,
    /// Different orders.
    Ii,
}

/// `sum_{M ⊆ [l], 1 <= |M| <= top} Var U_M(Y, Y)`.
fn square_variance_mass(
    y: &DegenerateStatistic,
    l: usize,
    top: usize,
    space: &ProductSpace,
) -> Result<f64, QuadrupleError> {
    let vars = product_component_variances(&y.decomposition, &y.decomposition, space)?;
    let inside = (1u32 << l) - 1;
    Ok(vars
        .iter()
        .enumerate()
        .filter(|(m, _)| {
            let m = *m as u32;
            let size = m.count_ones() as usize;
            m & !inside == 0 && size >= 1 && size <= top
        })
        .map(|(_, x)| x)
        .sum())
}

/// `sum_{|M| <= p+q-1} Var U_M(V, W)` against the variance bound for equal
/// (`case I`) or different (`case Ii`) orders.
pub fn check_varlemma2(
    v: &DegenerateStatistic,
    w: &DegenerateStatistic,
    space: &ProductSpace,
    case: LemmaCase,
) -> Result<BoundCheck, QuadrupleError> {
    same_space(v, w, space)?;
    let (q, p) = (v.order, w.order);
    match case {
        LemmaCase::I if p != q => {
            return Err(QuadrupleError::CaseMismatch {
                case,
                requirement: "equal orders",
            })
        }
        LemmaCase::Ii if p == q => {
            return Err(QuadrupleError::CaseMismatch {
                case,
                requirement: "different orders",
            })
        }
        _ => {}
    }
    let (m, n) = (v.size, w.size);
    let lo = m.min(n);
    let vars = product_component_variances(&v.decomposition, &w.decomposition, space)?;
    let lhs: f64 = vars
        .iter()
        .enumerate()
        .filter(|(mask, _)| ((*mask as u32).count_ones() as usize) < p + q)
        .map(|(_, x)| x)
        .sum();

    let s0 = s0_value(v, w, space)?;
    let (pf, qf) = (p as f64, q as f64);
    let bound = match case {
        LemmaCase::I => {
            let s1 = s1_value(v, w, space)?;
            let top = 2 * p - 1;
            pf * f64::min(
                w.rho_sq(n, space) * v.sigma_sq(m, space),
                v.rho_sq(m, space) * w.sigma_sq(n, space),
            ) + pf
                * (v.rho_sq(lo, space)
                    * w.rho_sq(lo, space)
                    * v.sigma_sq(lo, space)
                    * w.sigma_sq(lo, space))
                .sqrt()
                + square_variance_mass(v, lo, top, space)?.sqrt()
                    * square_variance_mass(w, lo, top, space)?.sqrt()
                + s1
                - s0
        }
        LemmaCase::Ii => {
            let top = 2 * p.max(q) - 1;
            f64::min(
                qf * w.rho_sq(n, space) * v.sigma_sq(m, space),
                pf * v.rho_sq(m, space) * w.sigma_sq(n, space),
            ) - s0
                + square_variance_mass(v, lo, top, space)?.sqrt()
                    * square_variance_mass(w, lo, top, space)?.sqrt()
        }
    };
    Ok(BoundCheck { value: lhs, bound })
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationRecord {
    pub check: String,
    pub instance: usize,
    pub m: usize,
    pub n: usize,
    pub q: usize,
    pub p: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

impl VerificationRecord {
    pub const CSV_HEADER: &'static str = "check,instance,m,n,q,p,lhs,rhs,margin,pass";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:?},{:?},{:?},{}",
            self.check,
            self.instance,
            self.m,
            self.n,
            self.q,
            self.p,
            self.lhs,
            self.rhs,
            self.margin,
            self.pass
        )
    }
}

/// A pair of independent normalized random homogeneous sums over Rademacher
/// coordinates: `V` of order `q` on `[m]`, `W` of order `p` on `[n]`, living
/// on `max(m, n)` coordinates. Degenerate by construction.
pub struct RandomPair {
    pub space: ProductSpace,
    pub v: DegenerateStatistic,
    pub w: DegenerateStatistic,
}

pub fn random_pair<R: Rng + ?Sized>(
    q: usize,
    m: usize,
    p: usize,
    n: usize,
    rng: &mut R,
) -> Result<RandomPair, QuadrupleError> {
    let space = ProductSpace::iid(&DiscreteDistribution::rademacher(), m.max(n))?;
    let kv = random_kernel(q, m, 1.0, rng)?;
    let kw = random_kernel(p, n, 1.0, rng)?;
    let v = DegenerateStatistic::from_kernel(&kv, &space)?;
    let w = DegenerateStatistic::from_kernel(&kw, &space)?;
    Ok(RandomPair { space, v, w })
}
