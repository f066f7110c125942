//! Distributions on the half line: finite targets, piecewise-linear densities,
//! empirical samples, and the metrics used to compare them.

mod density;
mod empirical;
mod finite;
mod metrics;

pub use density::TargetDensity;
pub use empirical::EmpiricalSample;
pub use finite::{DiscreteDistribution, FiniteTarget};
pub use metrics::{comparison_grid, kolmogorov_distance, ks_statistic, total_variation_atoms, Cdf, FnCdf};
