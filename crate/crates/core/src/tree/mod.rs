//! Finite rooted trees with edge lengths and leaf measures, and the
//! level-by-level grafting construction that realizes any finite target.

mod build;
mod sample;
mod split;
mod structure;

pub use build::{
    analytic_two_point, build_finite, exact_two_point, LayeredTree, Level, DEFAULT_LEAF_CAP, DEFAULT_PAIR_CAP,
};
pub use sample::{sample_npoint_matrix, sample_two_point, LeafSampler};
pub use split::{solve_weight_split, WeightSplit};
pub use structure::{pairwise_distance, TreeStructure};
