use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{HoeffdingError, ProductSpace};

/// Values of a statistic on the joint atoms of the coordinates in `scope`
/// (bit `i` = coordinate `i + 1`), laid out mixed-radix with the lowest
/// coordinate slowest. A full-scope table is a statistic of the whole space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticTable {
    scope: u32,
    values: Vec<f64>,
}

fn offset(digits: &[usize], strides: &[usize]) -> usize {
    digits.iter().zip(strides).map(|(d, s)| d * s).sum()
}

impl StatisticTable {
    pub fn new(scope: u32, values: Vec<f64>, space: &ProductSpace) -> Result<Self, HoeffdingError> {
        let t = Self { scope, values };
        t.check(space)?;
        Ok(t)
    }

    pub fn constant(c: f64) -> Self {
        Self {
            scope: 0,
            values: vec![c],
        }
    }

    pub fn zeros(scope: u32, space: &ProductSpace) -> Self {
        Self {
            scope,
            values: vec![0.0; space.scope_size(scope)],
        }
    }

    /// Full-scope table of `f(x_1, ..., x_n)`.
    pub fn from_fn(space: &ProductSpace, f: impl Fn(&[f64]) -> f64) -> Self {
        let full = space.full_mask();
        let mut values = Vec::with_capacity(space.atom_count());
        let mut x = vec![0.0; space.n()];
        space.walk(full, |d| {
            for (i, xi) in x.iter_mut().enumerate() {
                *xi = space.value(i, d[i]);
            }
            values.push(f(&x));
        });
        Self {
            scope: full,
            values,
        }
    }

    pub fn scope(&self) -> u32 {
        self.scope
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn check(&self, space: &ProductSpace) -> Result<(), HoeffdingError> {
        space.check_mask(self.scope)?;
        let expected = space.scope_size(self.scope);
        if self.values.len() != expected {
            return Err(HoeffdingError::ShapeMismatch {
                expected,
                found: self.values.len(),
            });
        }
        Ok(())
    }

    pub fn expectation(&self, space: &ProductSpace) -> f64 {
        let mut total = 0.0;
        let mut k = 0;
        space.walk(self.scope, |d| {
            total += self.values[k] * space.probability(self.scope, d);
            k += 1;
        });
        total
    }

    pub fn second_moment(&self, space: &ProductSpace) -> f64 {
        let mut total = 0.0;
        let mut k = 0;
        space.walk(self.scope, |d| {
            total += self.values[k] * self.values[k] * space.probability(self.scope, d);
            k += 1;
        });
        total
    }

    /// `E[self | F_J]` over the coordinates of `J`.
    pub(crate) fn condition(&self, j: u32, space: &ProductSpace) -> Self {
        let union = self.scope | j;
        let integrated = self.scope & !j;
        let s_self = space.strides(self.scope);
        let s_out = space.strides(j);
        let mut out = Self::zeros(j, space);
        space.walk(union, |d| {
            out.values[offset(d, &s_out)] +=
                self.values[offset(d, &s_self)] * space.probability(integrated, d);
        });
        out
    }

    /// The same function viewed as a table over the larger scope `target`.
    pub(crate) fn lift(&self, target: u32, space: &ProductSpace) -> Self {
        debug_assert_eq!(self.scope & !target, 0, "lift target must contain scope");
        if target == self.scope {
            return self.clone();
        }
        let s_self = space.strides(self.scope);
        let mut values = Vec::with_capacity(space.scope_size(target));
        space.walk(target, |d| values.push(self.values[offset(d, &s_self)]));
        Self {
            scope: target,
            values,
        }
    }

    /// `self += alpha * other`; scopes must match.
    pub(crate) fn axpy(&mut self, alpha: f64, other: &Self) {
        assert_eq!(self.scope, other.scope);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }

    /// Pointwise product over the union of both scopes.
    pub fn mul(&self, other: &Self, space: &ProductSpace) -> Self {
        let union = self.scope | other.scope;
        let s_a = space.strides(self.scope);
        let s_b = space.strides(other.scope);
        let mut values = Vec::with_capacity(space.scope_size(union));
        space.walk(union, |d| {
            values.push(self.values[offset(d, &s_a)] * other.values[offset(d, &s_b)]);
        });
        Self {
            scope: union,
            values,
        }
    }

    /// Statistic table as CSV rows `index,value` over joint-atom indices.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,value\n");
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{i},{v:?}").unwrap();
        }
        out
    }
}

/// `E[prod_k T_k]` for tables over arbitrary scopes.
pub fn expect_product(tables: &[&StatisticTable], space: &ProductSpace) -> f64 {
    let union = tables.iter().fold(0, |u, t| u | t.scope);
    let strides: Vec<Vec<usize>> = tables.iter().map(|t| space.strides(t.scope)).collect();
    let mut total = 0.0;
    space.walk(union, |d| {
        let mut prod = space.probability(union, d);
        for (t, s) in tables.iter().zip(&strides) {
            prod *= t.values[offset(d, s)];
        }
        total += prod;
    });
    total
}
