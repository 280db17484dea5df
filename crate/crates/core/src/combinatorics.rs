//! Small combinatorial helpers shared by the kernel and quadruple code.

/// `n!` as a float. Exact for `n <= 22`.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Binomial coefficient `C(n, k)`, saturating at `u64::MAX`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return u64::MAX;
        }
    }
    acc as u64
}

/// `base^exp` in `u64`, `None` on overflow.
pub fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    base.checked_pow(exp)
}

/// Largest `k` with `k^a <= m`, computed in integers.
pub fn integer_root(m: u64, a: u32) -> u64 {
    assert!(a >= 1, "root degree must be positive");
    if a == 1 || m <= 1 {
        return m;
    }
    // float guess, then correct in both directions
    let mut k = (m as f64).powf(1.0 / a as f64).floor() as u64;
    while k > 0 && checked_pow(k, a).is_none_or(|v| v > m) {
        k -= 1;
    }
    while checked_pow(k + 1, a).is_some_and(|v| v <= m) {
        k += 1;
    }
    k
}

/// Iterator over the strictly increasing `k`-tuples of `{1, ..., n}` in
/// lexicographic order.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: usize,
    current: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            current: (1..=k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let k = self.current.len();
        // advance the rightmost position that still has room
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.current[i] < self.n - (k - 1 - i) {
                self.current[i] += 1;
                for j in i + 1..k {
                    self.current[j] = self.current[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// All `k`-subsets of `{0, ..., n-1}` as bitmasks, in increasing numeric order.
pub fn subset_masks(n: usize, k: usize) -> Vec<u32> {
    assert!(n <= 31);
    (0u32..(1u32 << n))
        .filter(|m| m.count_ones() as usize == k)
        .collect()
}

/// Submasks of `mask`, including `0` and `mask` itself.
pub fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut sub = mask;
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = sub;
        if sub == 0 {
            done = true;
        } else {
            sub = (sub - 1) & mask;
        }
        Some(out)
    })
}

/// Bit positions set in `mask`, ascending.
pub fn mask_bits(mask: u32) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let b = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(b)
        }
    })
}

/// Pairwise (tree) summation. The result depends only on the order of
/// `values`, never on how they were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}
