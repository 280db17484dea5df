//! Contraction kernels `f ⋆_r f` and their counting-measure L2 norms.
//!
//! For `p`-subsets the contraction only depends on the index *sets* of its
//! two argument blocks. Writing `c(A, B) = sum_L a_{A∪L} a_{B∪L}` over
//! `r`-subsets `L` (with `A ∪ L`, `B ∪ L` supports), one has
//! `f ⋆_r f(i, j) = r! / p!^2 * c(set(i), set(j))` whenever each block has
//! distinct entries, and zero otherwise. Hence
//! `||f ⋆_r f||_2^2 = ((p-r)! r! / p!^2)^2 * sum_{A,B} c(A, B)^2`.
//! Both quantities are accumulated from pairs of supports sharing `r`
//! indices, never from the dense grid `[m]^{2(p-r)}`.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::{KernelError, SparseKernel};
use crate::combinatorics::{factorial, pairwise_sum, Combinations};

/// Nonzero values of `f ⋆_r f`, keyed by the (sorted) index sets of the two
/// argument blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionTable {
    order: usize,
    depth: usize,
    values: BTreeMap<(Vec<u32>, Vec<u32>), f64>,
}

impl ContractionTable {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Entries `((A, B), value)` with `A`, `B` sorted `(p-r)`-subsets.
    pub fn entries(&self) -> impl Iterator<Item = (&(Vec<u32>, Vec<u32>), f64)> {
        self.values.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Evaluates `f ⋆_r f` at a `2(p-r)`-tuple `(i_1..i_{p-r}, j_1..j_{p-r})`.
    pub fn get(&self, tuple: &[usize]) -> f64 {
        let w = self.order - self.depth;
        if tuple.len() != 2 * w {
            return 0.0;
        }
        let block = |s: &[usize]| -> Option<Vec<u32>> {
            let mut v: Vec<u32> = s.iter().map(|&i| i as u32).collect();
            v.sort_unstable();
            v.windows(2).all(|p| p[0] != p[1]).then_some(v)
        };
        match (block(&tuple[..w]), block(&tuple[w..])) {
            (Some(a), Some(b)) => self.values.get(&(a, b)).copied().unwrap_or(0.0),
            _ => 0.0,
        }
    }

    /// Counting-measure L2 norm over `[m]^{2(p-r)}`.
    pub fn norm(&self) -> f64 {
        let mult = factorial(self.order - self.depth);
        let sq: Vec<f64> = self.values.values().map(|v| v * v).collect();
        mult * pairwise_sum(&sq).sqrt()
    }
}

/// Support adjacency: `(p-r)`-subsets ("rests") and `r`-subsets ("cores")
/// linked through the supports containing both.
struct LinkIndex {
    rest_keys: Vec<Vec<u32>>,
    // rest id -> [(core id, a_J)]
    by_rest: Vec<Vec<(u32, f64)>>,
    // core id -> [(rest id, a_J)]
    by_core: Vec<Vec<(u32, f64)>>,
}

impl LinkIndex {
    fn build(k: &SparseKernel, r: usize) -> Self {
        let p = k.order();
        let positions: Vec<Vec<usize>> = Combinations::new(p, r).collect();
        let mut rest_ids: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut core_ids: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut rest_keys = Vec::new();
        let mut by_rest: Vec<Vec<(u32, f64)>> = Vec::new();
        let mut by_core: Vec<Vec<(u32, f64)>> = Vec::new();
        for (set, a) in k.supports() {
            for pos in &positions {
                let core: Vec<u32> = pos.iter().map(|&q| set[q - 1]).collect();
                let rest: Vec<u32> = set.iter().copied().filter(|i| !core.contains(i)).collect();
                let rid = *rest_ids.entry(rest.clone()).or_insert_with(|| {
                    rest_keys.push(rest);
                    by_rest.push(Vec::new());
                    (rest_keys.len() - 1) as u32
                });
                let cid = *core_ids.entry(core).or_insert_with(|| {
                    by_core.push(Vec::new());
                    (by_core.len() - 1) as u32
                });
                by_rest[rid as usize].push((cid, a));
                by_core[cid as usize].push((rid, a));
            }
        }
        Self {
            rest_keys,
            by_rest,
            by_core,
        }
    }
}

fn check_depth(k: &SparseKernel, r: usize) -> Result<(), KernelError> {
    if r == 0 || r >= k.order() {
        return Err(KernelError::DepthOutOfRange {
            depth: r,
            max: k.order().saturating_sub(1),
        });
    }
    Ok(())
}

/// All nonzero values of `f ⋆_r f`. Intended for small kernels; use
/// [`contraction_norm`] for the norm of large ones.
pub fn contraction(k: &SparseKernel, r: usize) -> Result<ContractionTable, KernelError> {
    check_depth(k, r)?;
    let p = k.order();
    let scale = factorial(r) / (factorial(p) * factorial(p));
    let links = LinkIndex::build(k, r);
    let mut values = BTreeMap::new();
    for (a_id, row) in links.by_rest.iter().enumerate() {
        let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
        for &(core, x) in row {
            for &(b_id, y) in &links.by_core[core as usize] {
                *acc.entry(b_id).or_insert(0.0) += x * y;
            }
        }
        for (b_id, c) in acc {
            if c != 0.0 {
                values.insert(
                    (
                        links.rest_keys[a_id].clone(),
                        links.rest_keys[b_id as usize].clone(),
                    ),
                    scale * c,
                );
            }
        }
    }
    Ok(ContractionTable {
        order: p,
        depth: r,
        values,
    })
}

/// `||f ⋆_r f||_2` with respect to counting measure on `[m]^{2(p-r)}`.
///
/// Parallel over rests; per-rest partial sums are reduced pairwise in a fixed
/// order, so the result does not depend on the thread count.
pub fn contraction_norm(k: &SparseKernel, r: usize) -> Result<f64, KernelError> {
    check_depth(k, r)?;
    let p = k.order();
    let links = LinkIndex::build(k, r);
    let n_rest = links.rest_keys.len();
    let partials: Vec<f64> = (0..n_rest)
        .into_par_iter()
        .map_init(
            || {
                (
                    vec![0.0f64; n_rest],
                    vec![u32::MAX; n_rest],
                    Vec::<u32>::new(),
                )
            },
            |(acc, stamp, touched), a_id| {
                touched.clear();
                for &(core, x) in &links.by_rest[a_id] {
                    for &(b_id, y) in &links.by_core[core as usize] {
                        let b = b_id as usize;
                        if stamp[b] != a_id as u32 {
                            stamp[b] = a_id as u32;
                            acc[b] = 0.0;
                            touched.push(b_id);
                        }
                        acc[b] += x * y;
                    }
                }
                touched
                    .iter()
                    .map(|&b| acc[b as usize] * acc[b as usize])
                    .sum::<f64>()
            },
        )
        .collect();
    let mult = factorial(p - r) * factorial(r) / (factorial(p) * factorial(p));
    Ok(mult * pairwise_sum(&partials).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::random_kernel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Dense evaluation over the full grid: O(m^{2p-r}).
    fn dense_contraction(k: &SparseKernel, r: usize, tuple: &[usize]) -> f64 {
        let m = k.size();
        let p = k.order();
        let w = p - r;
        let mut total = 0.0;
        let mut l = vec![1usize; r];
        loop {
            let mut left = tuple[..w].to_vec();
            left.extend_from_slice(&l);
            let mut right = tuple[w..].to_vec();
            right.extend_from_slice(&l);
            total += k.point_value(&left) * k.point_value(&right);
            // odometer over [m]^r
            let mut pos = 0;
            loop {
                if pos == r {
                    return total;
                }
                l[pos] += 1;
                if l[pos] <= m {
                    break;
                }
                l[pos] = 1;
                pos += 1;
            }
        }
    }

    fn dense_norm(k: &SparseKernel, r: usize) -> f64 {
        let m = k.size();
        let len = 2 * (k.order() - r);
        let mut t = vec![1usize; len];
        let mut sum = 0.0;
        loop {
            let v = dense_contraction(k, r, &t);
            sum += v * v;
            let mut pos = 0;
            loop {
                if pos == len {
                    return sum.sqrt();
                }
                t[pos] += 1;
                if t[pos] <= m {
                    break;
                }
                t[pos] = 1;
                pos += 1;
            }
        }
    }

    #[test]
    fn single_support_order_two() {
        let k = SparseKernel::new(2, 2, vec![(vec![1, 2], 1.0)]).unwrap();
        let table = contraction(&k, 1).unwrap();
        assert_eq!(table.get(&[1, 1]), 0.25);
        assert_eq!(table.get(&[2, 2]), 0.25);
        assert_eq!(table.get(&[1, 2]), 0.0);
        assert_eq!(table.get(&[2, 1]), 0.0);
        assert!((table.norm() * table.norm() - 0.125).abs() < 1e-15);
        let norm = contraction_norm(&k, 1).unwrap();
        assert!((norm * norm - 0.125).abs() < 1e-15);
        assert!((dense_norm(&k, 1) - norm).abs() < 1e-15);
    }

    #[test]
    fn disjoint_halves_have_no_cross_terms() {
        let k = SparseKernel::new(2, 4, vec![(vec![1, 2], 0.6), (vec![3, 4], -0.8)]).unwrap();
        let table = contraction(&k, 1).unwrap();
        for a in 1..=2 {
            for b in 3..=4 {
                assert_eq!(table.get(&[a, b]), 0.0);
                assert_eq!(table.get(&[b, a]), 0.0);
            }
        }
        assert!(table.get(&[1, 1]) > 0.0 && table.get(&[3, 3]) > 0.0);
    }

    #[test]
    fn depth_validation() {
        let k = SparseKernel::new(2, 3, vec![(vec![1, 2], 1.0)]).unwrap();
        assert!(contraction_norm(&k, 0).is_err());
        assert!(contraction_norm(&k, 2).is_err());
        assert!(contraction(&k, 2).is_err());
    }

    #[test]
    fn agrees_with_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(p, m) in &[(2usize, 7usize), (3, 6), (3, 7), (4, 6)] {
            for _ in 0..3 {
                let k = random_kernel(p, m, 0.6, &mut rng).unwrap();
                for r in 1..p {
                    let fast = contraction_norm(&k, r).unwrap();
                    let dense = dense_norm(&k, r);
                    assert!(
                        (fast - dense).abs() < 1e-12,
                        "p={p} m={m} r={r}: {fast} vs {dense}"
                    );
                    let table = contraction(&k, r).unwrap();
                    assert!((table.norm() - dense).abs() < 1e-12);
                    // table entries match pointwise on a few tuples
                    for ((a, b), v) in table.entries().take(10) {
                        let mut t: Vec<usize> = a.iter().map(|&i| i as usize).collect();
                        t.extend(b.iter().map(|&i| i as usize));
                        assert!((dense_contraction(&k, r, &t) - v).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn table_is_block_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let k = random_kernel(3, 8, 0.5, &mut rng).unwrap();
        for r in 1..3 {
            let t = contraction(&k, r).unwrap();
            for ((a, b), v) in t.entries() {
                let w = t.values[&(b.clone(), a.clone())];
                assert!((v - w).abs() < 1e-15);
            }
        }
    }
}
