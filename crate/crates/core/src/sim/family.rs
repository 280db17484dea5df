use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::{rng_for, standard_normal, SimError};
use crate::hoeffding::DiscreteDistribution;

/// Intensities at or below this are sampled by CDF inversion.
pub const POISSON_INVERSION_LIMIT: f64 = 30.0;

/// Poisson intensity, shared or per index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Lambda {
    Constant(f64),
    PerIndex(Vec<f64>),
}

/// Law of the independent, centered, unit-variance inputs `X_1, X_2, ...`.
///
/// JSON form: `{"kind": "gaussian"}`, `{"kind": "rademacher"}`,
/// `{"kind": "normalized_poisson", "lambda": 2.0}` (or a per-index array) and
/// `{"kind": "finite", "atoms": [[value, probability], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "FamilyDoc")]
pub enum InputFamily {
    Gaussian,
    Rademacher,
    /// `P_i = N_i / sqrt(λ_i) - sqrt(λ_i)` with `N_i ~ Poisson(λ_i)`.
    NormalizedPoisson {
        lambda: Lambda,
    },
    /// A standardized finite distribution used for every index.
    Finite {
        atoms: DiscreteDistribution,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyDoc {
    kind: String,
    lambda: Option<Lambda>,
    atoms: Option<DiscreteDistribution>,
}

impl TryFrom<FamilyDoc> for InputFamily {
    type Error = String;

    fn try_from(doc: FamilyDoc) -> Result<Self, String> {
        let family = match (doc.kind.as_str(), doc.lambda, doc.atoms) {
            ("gaussian", None, None) => Self::Gaussian,
            ("rademacher", None, None) => Self::Rademacher,
            ("normalized_poisson", Some(lambda), None) => Self::NormalizedPoisson { lambda },
            ("finite", None, Some(atoms)) => Self::Finite { atoms },
            (kind @ ("gaussian" | "rademacher" | "normalized_poisson" | "finite"), _, _) => {
                return Err(format!("wrong parameters for input family `{kind}`"))
            }
            (kind, _, _) => return Err(format!("unknown input family `{kind}`")),
        };
        Ok(family)
    }
}

impl InputFamily {
    pub fn poisson(lambda: f64) -> Self {
        Self::NormalizedPoisson {
            lambda: Lambda::Constant(lambda),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Gaussian => "gaussian".into(),
            Self::Rademacher => "rademacher".into(),
            Self::NormalizedPoisson {
                lambda: Lambda::Constant(l),
            } => format!("normalized_poisson({l})"),
            Self::NormalizedPoisson { .. } => "normalized_poisson(per-index)".into(),
            Self::Finite { .. } => "finite".into(),
        }
    }

    /// Checks that the family describes `m` centered unit-variance inputs.
    pub fn validate(&self, m: usize) -> Result<(), SimError> {
        match self {
            Self::Gaussian | Self::Rademacher => Ok(()),
            Self::NormalizedPoisson { lambda } => {
                let values: &[f64] = match lambda {
                    Lambda::Constant(l) => std::slice::from_ref(l),
                    Lambda::PerIndex(v) => {
                        if v.len() < m {
                            return Err(SimError::LengthMismatch {
                                expected: m,
                                found: v.len(),
                            });
                        }
                        v
                    }
                };
                match values.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
                    Some(&bad) => Err(SimError::BadLambda(bad)),
                    None => Ok(()),
                }
            }
            Self::Finite { atoms } => {
                if atoms.is_standardized() {
                    Ok(())
                } else {
                    Err(SimError::BadFamily(
                        "finite inputs must have mean 0 and variance 1".into(),
                    ))
                }
            }
        }
    }

    fn lambda(&self, i: usize) -> f64 {
        match self {
            Self::NormalizedPoisson {
                lambda: Lambda::Constant(l),
            } => *l,
            Self::NormalizedPoisson {
                lambda: Lambda::PerIndex(v),
            } => v[i],
            _ => unreachable!("only Poisson inputs have an intensity"),
        }
    }

    /// `E[X_i^4]` for the 0-based index `i`.
    pub fn fourth_moment(&self, i: usize) -> f64 {
        match self {
            Self::Gaussian => 3.0,
            Self::Rademacher => 1.0,
            Self::NormalizedPoisson { .. } => 3.0 + 1.0 / self.lambda(i),
            Self::Finite { atoms } => atoms.moment(4),
        }
    }

    pub fn fourth_moments(&self, m: usize) -> Vec<f64> {
        (0..m).map(|i| self.fourth_moment(i)).collect()
    }

    /// `β = max_{i <= m} E[X_i^4]`.
    pub fn beta(&self, m: usize) -> f64 {
        self.fourth_moments(m).into_iter().fold(1.0, f64::max)
    }

    /// Fills `out` with one draw of `X_1, ..., X_{out.len()}`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            Self::Gaussian => out.iter_mut().for_each(|x| *x = standard_normal(rng)),
            Self::Rademacher => out
                .iter_mut()
                .for_each(|x| *x = if rng.random::<bool>() { 1.0 } else { -1.0 }),
            Self::NormalizedPoisson { .. } => {
                for (i, x) in out.iter_mut().enumerate() {
                    let l = self.lambda(i);
                    *x = poisson(l, rng) / l.sqrt() - l.sqrt();
                }
            }
            Self::Finite { atoms } => {
                let atoms = atoms.atoms();
                for x in out.iter_mut() {
                    let u = rng.random::<f64>();
                    let mut acc = 0.0;
                    *x = atoms[atoms.len() - 1].0;
                    for &(v, p) in atoms {
                        acc += p;
                        if u < acc {
                            *x = v;
                            break;
                        }
                    }
                }
            }
        }
    }
}

fn poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> f64 {
    if lambda > POISSON_INVERSION_LIMIT {
        return Poisson::new(lambda)
            .expect("intensity validated")
            .sample(rng);
    }
    let u = rng.random::<f64>();
    let mut k = 0u32;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    while u > cdf && p > 0.0 {
        k += 1;
        p *= lambda / f64::from(k);
        cdf += p;
    }
    f64::from(k)
}

/// `m` inputs drawn from the stream seeded by `seed`.
pub fn sample_inputs(family: &InputFamily, m: usize, seed: u64) -> Result<Vec<f64>, SimError> {
    family.validate(m)?;
    let mut out = vec![0.0; m];
    family.sample_into(&mut rng_for(seed), &mut out);
    Ok(out)
}
