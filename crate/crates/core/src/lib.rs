//! Degenerate U-statistics and homogeneous sums: exact Hoeffding
//! decompositions, contraction diagnostics, fractional-product kernels and
//! seeded Monte Carlo for their empirical processes.
//!
//! The crate is organised around the objects it computes with:
//!
//! * [`kernel`]: sparse symmetric coefficient arrays `{a_J}` of homogeneous
//!   sums, their influence/Lindeberg/contraction diagnostics and the
//!   fractional cartesian product family.
//! * [`hoeffding`]: exact Hoeffding decompositions over small finite product
//!   spaces.
//! * [`quadruple`]: the bifold quadruple sets `S0`/`S1` and brute-force checks
//!   of the covariance identity and inequalities built on them.
//! * [`sim`]: input families, path evaluation, limit-process sampling and
//!   reproducible replication.
//! * [`stats`]: fourth cumulants, Kolmogorov-Smirnov tests, covariance and
//!   modulus-of-continuity diagnostics.
//! * [`experiment`]: config-driven experiment runner behind the `ustat` binary.
//!
//! Indices of coordinates are 1-based everywhere in the public API, matching
//! the `[m] = {1, ..., m}` convention of the kernel file format.

pub mod combinatorics;
pub mod experiment;
pub mod hoeffding;
pub mod kernel;
pub mod quadruple;
pub mod sim;
pub mod stats;

pub use hoeffding::{DecomposedStatistic, DiscreteDistribution, ProductSpace, StatisticTable};
pub use kernel::{ContractionTable, SparseKernel};
pub use sim::{InputFamily, ProcessPath, ReplicationEnsemble};
pub use stats::DiagnosticReport;
