//! Learning mixtures of permutations from groups of pairwise comparisons.
//!
//! Permutations are stored 0-based; see [`perm`] for the text notation.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod demix;
pub mod dist;
pub mod error;
pub mod mallows;
pub mod moments;
pub mod oracle;
pub mod perm;
pub mod random;

pub use demix::{DemixConfig, HardInstance, Mode, WeightConfig};
pub use dist::DiscreteDist;
pub use error::{Error, Result};
pub use mallows::{MallowsMixture, MallowsModel, SampleSet};
pub use moments::{Convention, EpsScan, LCheck, LMatrix};
pub use oracle::{DeltaMixture, Mass, MixtureOracle, SetOracle, StrongGroupOracle, WeakGroupOracle};
pub use perm::{
    all_permutations, chi, factorial, hausdorff, kendall_tau, relative_order, restrict, satisfies_block, subsets,
    BlockStructure, ChiVector, ComparisonTuple, IndexSet, Injection, Permutation, RelativeOrder,
};
