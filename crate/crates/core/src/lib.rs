//! Measured metric spaces with prescribed two-point distance distributions.
//!
//! Finite targets are realized by finite trees, densities by a grafted composite of a
//! finite tree and a dyadic spherically symmetric tree, and general continuous laws by
//! random mixtures of such spaces. Every construction comes with a verifier.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod builder;
pub mod cli;
pub mod distributions;
pub mod dyadic;
pub mod error;
pub mod feasibility;
pub mod io;
pub mod mixture;
pub mod piecewise;
pub mod rng;
pub mod scalar;
pub mod tree;

pub use error::{Error, Result};
pub use rng::{SamplerState, SeedRecord, DEFAULT_SEED};
pub use scalar::Real;

pub type FiniteTargetF64 = distributions::FiniteTarget<f64>;
pub type FiniteTargetF32 = distributions::FiniteTarget<f32>;
pub type TargetDensityF64 = distributions::TargetDensity<f64>;
pub type TargetDensityF32 = distributions::TargetDensity<f32>;
pub type TreeStructureF64 = tree::TreeStructure<f64>;
pub type TreeStructureF32 = tree::TreeStructure<f32>;
