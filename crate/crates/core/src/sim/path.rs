use serde::{Deserialize, Serialize};

use super::{check_grid, grid_cut, rng_for, standard_normal, SimError};
use crate::kernel::SparseKernel;

/// Piecewise-constant, right-continuous `d`-dimensional path on a grid in
/// `[0, 1]`. Values are stored time-major: the `d` components at grid time
/// 0, then at grid time 1, and so on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessPath {
    grid: Vec<f64>,
    dimension: usize,
    orders: Vec<usize>,
    values: Vec<f64>,
}

impl ProcessPath {
    pub fn new(
        grid: Vec<f64>,
        dimension: usize,
        orders: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, SimError> {
        check_grid(&grid)?;
        if values.len() != grid.len() * dimension {
            return Err(SimError::LengthMismatch {
                expected: grid.len() * dimension,
                found: values.len(),
            });
        }
        Ok(Self {
            grid,
            dimension,
            orders,
            values,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Orders of the homogeneous sums behind each component; empty for
    /// sampled limit paths.
    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Values at the `index`-th grid time.
    pub fn at(&self, index: usize) -> &[f64] {
        &self.values[index * self.dimension..(index + 1) * self.dimension]
    }

    /// Value at an arbitrary `t`: the value at the last grid time `<= t`.
    pub fn value_at(&self, t: f64) -> Option<&[f64]> {
        let idx = self.grid.partition_point(|&g| g <= t);
        (idx > 0).then(|| self.at(idx - 1))
    }

    /// Component `k` (0-based) along the grid.
    pub fn component(&self, k: usize) -> Vec<f64> {
        self.values
            .iter()
            .skip(k)
            .step_by(self.dimension)
            .copied()
            .collect()
    }

    pub fn terminal(&self) -> &[f64] {
        self.at(self.grid.len() - 1)
    }
}

#[inline]
fn term(set: &[u32], a: f64, x: &[f64]) -> f64 {
    set.iter().fold(a, |acc, &i| acc * x[i as usize - 1])
}

/// `sum_J a_J prod_{i in J} x_i`.
pub fn evaluate_sum(k: &SparseKernel, x: &[f64]) -> Result<f64, SimError> {
    if x.len() < k.size() {
        return Err(SimError::LengthMismatch {
            expected: k.size(),
            found: x.len(),
        });
    }
    let mut acc = 0.0;
    for (set, a) in k.supports() {
        acc += term(set, a, x);
    }
    Ok(acc)
}

/// Empirical-process path of `kernels` (sharing one size `m`) at the inputs
/// `x`. Supports are stored by increasing largest index, so one pass over
/// them with a running sum serves every grid time; the value at `t = 1`
/// equals [`evaluate_sum`] bit for bit.
pub fn evaluate_path(
    kernels: &[SparseKernel],
    x: &[f64],
    grid: &[f64],
) -> Result<ProcessPath, SimError> {
    let first = kernels.first().ok_or(SimError::NoKernels)?;
    let m = first.size();
    if kernels.iter().any(|k| k.size() != m) {
        return Err(SimError::MixedSizes);
    }
    if x.len() < m {
        return Err(SimError::LengthMismatch {
            expected: m,
            found: x.len(),
        });
    }
    check_grid(grid)?;
    let d = kernels.len();
    let mut values = vec![0.0; grid.len() * d];
    for (c, k) in kernels.iter().enumerate() {
        let mut supports = k.supports().peekable();
        let mut acc = 0.0;
        for (g, &t) in grid.iter().enumerate() {
            let cut = grid_cut(m, t) as u32;
            while let Some((set, a)) = supports.next_if(|(set, _)| set[set.len() - 1] <= cut) {
                acc += term(set, a, x);
            }
            values[g * d + c] = acc;
        }
    }
    Ok(ProcessPath {
        grid: grid.to_vec(),
        dimension: d,
        orders: kernels.iter().map(SparseKernel::order).collect(),
        values,
    })
}

/// `t^exponent` on the grid.
pub fn power_time_change(exponent: f64, grid: &[f64]) -> Vec<f64> {
    grid.iter().map(|t| t.powf(exponent)).collect()
}

/// Independent time-changed Brownian motions `Z_t(k) = B_{v_k(t)}(k)` on the
/// grid, with `v_k` given by its values at the grid times.
pub fn sample_limit_path(
    time_changes: &[Vec<f64>],
    grid: &[f64],
    seed: u64,
) -> Result<ProcessPath, SimError> {
    check_grid(grid)?;
    for (k, v) in time_changes.iter().enumerate() {
        let fail = |reason: &str| SimError::NonMonotoneTimeChange {
            component: k,
            reason: reason.into(),
        };
        if v.len() != grid.len() {
            return Err(fail("one value per grid time required"));
        }
        if v.iter().any(|x| !x.is_finite()) || v[0] < 0.0 {
            return Err(fail("values must be finite and start nonnegative"));
        }
        if v.windows(2).any(|w| w[1] < w[0]) {
            return Err(fail("decreasing step"));
        }
    }
    let d = time_changes.len();
    let mut rng = rng_for(seed);
    let mut values = vec![0.0; grid.len() * d];
    for (k, v) in time_changes.iter().enumerate() {
        let mut z = 0.0;
        let mut prev = 0.0;
        for (g, &vt) in v.iter().enumerate() {
            z += (vt - prev).sqrt() * standard_normal(&mut rng);
            prev = vt;
            values[g * d + k] = z;
        }
    }
    Ok(ProcessPath {
        grid: grid.to_vec(),
        dimension: d,
        orders: Vec::new(),
        values,
    })
}
