use serde::{Deserialize, Serialize};

use super::HoeffdingError;

/// Absolute tolerance on probability sums and mean/variance flags.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-12;

/// Finite real distribution given by `(value, probability)` atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct DiscreteDistribution {
    atoms: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for DiscreteDistribution {
    type Error = HoeffdingError;

    fn try_from(atoms: Vec<(f64, f64)>) -> Result<Self, Self::Error> {
        Self::new(atoms)
    }
}

impl From<DiscreteDistribution> for Vec<(f64, f64)> {
    fn from(d: DiscreteDistribution) -> Self {
        d.atoms
    }
}

impl DiscreteDistribution {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self, HoeffdingError> {
        if atoms.is_empty() {
            return Err(HoeffdingError::InvalidDistribution("no atoms".into()));
        }
        if atoms
            .iter()
            .any(|&(v, p)| !v.is_finite() || !p.is_finite() || p <= 0.0)
        {
            return Err(HoeffdingError::InvalidDistribution(
                "atoms need finite values and positive probabilities".into(),
            ));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            return Err(HoeffdingError::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { atoms })
    }

    /// Uniform on `{-1, +1}`.
    pub fn rademacher() -> Self {
        Self {
            atoms: vec![(-1.0, 0.5), (1.0, 0.5)],
        }
    }

    /// Affine rescaling of `atoms` to mean 0 and variance 1.
    pub fn standardized(atoms: Vec<(f64, f64)>) -> Result<Self, HoeffdingError> {
        let raw = Self::new(atoms)?;
        let mean = raw.mean();
        let sd = raw.variance().sqrt();
        if sd.is_nan() || sd <= 0.0 {
            return Err(HoeffdingError::InvalidDistribution(
                "degenerate distribution cannot be standardized".into(),
            ));
        }
        Self::new(
            raw.atoms
                .iter()
                .map(|&(v, p)| ((v - mean) / sd, p))
                .collect(),
        )
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Raw moment `E[X^k]`.
    pub fn moment(&self, k: i32) -> f64 {
        self.atoms.iter().map(|&(v, p)| p * v.powi(k)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.atoms
            .iter()
            .map(|&(v, p)| p * (v - mean) * (v - mean))
            .sum()
    }

    pub fn is_centered(&self) -> bool {
        self.mean().abs() <= DISTRIBUTION_TOLERANCE
    }

    pub fn is_standardized(&self) -> bool {
        self.is_centered() && (self.variance() - 1.0).abs() <= DISTRIBUTION_TOLERANCE
    }
}

/// Caps on brute-force enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineLimits {
    pub max_coordinates: usize,
    pub max_atoms: usize,
}

impl Default for EngineLimits {
    fn default() -> Self {
        Self {
            max_coordinates: 12,
            max_atoms: 1_000_000,
        }
    }
}

/// Product of independent finite coordinates. Joint outcomes are laid out in
/// mixed-radix order with coordinate 1 slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSpace {
    coordinates: Vec<DiscreteDistribution>,
    #[serde(default)]
    limits: EngineLimits,
}

impl ProductSpace {
    pub fn new(coordinates: Vec<DiscreteDistribution>) -> Result<Self, HoeffdingError> {
        Self::with_limits(coordinates, EngineLimits::default())
    }

    pub fn with_limits(
        coordinates: Vec<DiscreteDistribution>,
        limits: EngineLimits,
    ) -> Result<Self, HoeffdingError> {
        if coordinates.len() > 31 {
            return Err(HoeffdingError::TooLarge {
                coordinates: coordinates.len(),
                atoms: usize::MAX,
            });
        }
        let atoms = coordinates
            .iter()
            .try_fold(1usize, |acc, d| acc.checked_mul(d.len()))
            .unwrap_or(usize::MAX);
        if atoms > limits.max_atoms {
            return Err(HoeffdingError::TooLarge {
                coordinates: coordinates.len(),
                atoms,
            });
        }
        Ok(Self {
            coordinates,
            limits,
        })
    }

    /// `n` independent copies of `dist`.
    pub fn iid(dist: &DiscreteDistribution, n: usize) -> Result<Self, HoeffdingError> {
        Self::new(vec![dist.clone(); n])
    }

    pub fn n(&self) -> usize {
        self.coordinates.len()
    }

    pub fn limits(&self) -> EngineLimits {
        self.limits
    }

    pub fn coordinate(&self, i: usize) -> &DiscreteDistribution {
        &self.coordinates[i]
    }

    pub fn coordinates(&self) -> &[DiscreteDistribution] {
        &self.coordinates
    }

    /// Mask with every coordinate set.
    pub fn full_mask(&self) -> u32 {
        if self.n() == 32 {
            u32::MAX
        } else {
            (1u32 << self.n()) - 1
        }
    }

    /// Number of joint atoms of the coordinates in `scope`.
    pub fn scope_size(&self, scope: u32) -> usize {
        crate::combinatorics::mask_bits(scope)
            .map(|i| self.coordinates[i].len())
            .product()
    }

    pub fn atom_count(&self) -> usize {
        self.scope_size(self.full_mask())
    }

    /// Per-coordinate strides of a table over `scope` (0 outside the scope).
    pub(crate) fn strides(&self, scope: u32) -> Vec<usize> {
        let mut strides = vec![0; self.n()];
        let mut s = 1;
        for i in (0..self.n()).rev() {
            if scope & (1 << i) != 0 {
                strides[i] = s;
                s *= self.coordinates[i].len();
            }
        }
        strides
    }

    /// Visits every assignment of the coordinates in `scope`, in table order,
    /// passing per-coordinate atom indices (0 outside `scope`).
    pub(crate) fn walk(&self, scope: u32, mut visit: impl FnMut(&[usize])) {
        let coords: Vec<usize> = crate::combinatorics::mask_bits(scope).collect();
        let mut digits = vec![0usize; self.n()];
        loop {
            visit(&digits);
            // last coordinate fastest
            let mut advanced = false;
            for &i in coords.iter().rev() {
                digits[i] += 1;
                if digits[i] < self.coordinates[i].len() {
                    advanced = true;
                    break;
                }
                digits[i] = 0;
            }
            if !advanced {
                return;
            }
        }
    }

    /// Probability of the coordinates in `scope` taking the given atoms.
    pub(crate) fn probability(&self, scope: u32, digits: &[usize]) -> f64 {
        crate::combinatorics::mask_bits(scope)
            .map(|i| self.coordinates[i].atoms[digits[i]].1)
            .product()
    }

    pub(crate) fn value(&self, i: usize, digit: usize) -> f64 {
        self.coordinates[i].atoms[digit].0
    }

    pub(crate) fn check_mask(&self, mask: u32) -> Result<(), HoeffdingError> {
        if mask & !self.full_mask() != 0 {
            return Err(HoeffdingError::BadIndexSet { mask, n: self.n() });
        }
        Ok(())
    }
}
