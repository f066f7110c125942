//! The infinite spherically symmetric tree used as a graft: branching rules,
//! closed-form pair-distance density and distribution function, and samplers.

mod kappa;
mod kernel;
mod model;
mod sample;

pub use kappa::{
    density_floor, level_cap, select_kappa_density, select_kappa_envelope, EnvelopeFunction, Interpolation,
    KappaOrigin, KappaSequence,
};
pub use kernel::{triangle_cdf, triangle_phi};
pub use model::{psi_cdf, psi_density, psi_n, psi_n_cdf, DyadicModel};
pub use sample::{
    sample_pair_distance, sample_pair_distance_series, sample_pair_distances, sample_root_distance,
    sample_root_distances,
};
