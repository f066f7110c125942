//! Densities realized up to a margin: a finite skeleton carrying scaled dyadic grafts.

mod certify;
mod composite;
mod density;
mod kernel_sum;
mod params;

pub use certify::{certify_domination, domination_report, CertificateReport, RatioPoint, DEFAULT_INTERIOR_POINTS};
pub use composite::{
    build_composite, build_composite_explicit, sample_composite, CompositeSpace, DiscretizedTarget, Skeleton,
};
pub use density::BuiltDensity;
pub use kernel_sum::{kernel_sum, KernelSumTable};
pub use params::{
    choose_margin_params, derive_params, derive_params_capped, greedy_cover, grid_count, margin_constant, p0_ceiling,
    superlevel_set, BuildParams, MarginParams, DEFAULT_INTERVAL_CAP,
};

use crate::distributions::TargetDensity;
use crate::error::Result;
use crate::scalar::Real;

/// Parameters and achieved density for `f` at margin `ζ`.
pub fn build_density<T: Real>(f: &TargetDensity<T>, zeta: T) -> Result<(BuildParams<T>, BuiltDensity<T>)> {
    let margin = choose_margin_params(zeta)?;
    let params = derive_params(f, margin.beta, margin.n)?;
    let g = BuiltDensity::new(&params, f);
    Ok((params, g))
}
