//! Continuous densities as countable mixtures of built densities.
//!
//! `f = Σ_{k<=N} 2^{-k} g_k + 2^{-N} f_N` where `g_{k}` is built for `f_{k-1}` at margin
//! `1/2` and `f_k = (2 f_{k-1} - g_k) / z_k`, with `z_k` the numerical renormalizer.

use serde::{Deserialize, Serialize};

use crate::builder::{
    build_composite, build_density, certify_domination, BuiltDensity, CertificateReport, CompositeSpace,
};
use crate::distributions::{Cdf, EmpiricalSample, TargetDensity};
use crate::error::{Error, Result};
use crate::rng::SamplerState;
use crate::scalar::Real;
use crate::tree::DEFAULT_LEAF_CAP;

/// Margin used for every level: `g_k <= (3/2) f_{k-1}` keeps `f_k >= f_{k-1}/2`.
pub const LEVEL_ZETA: f64 = 0.5;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MixtureComponent<T: Real> {
    pub level: usize,
    pub weight: T,
    pub density: BuiltDensity<T>,
    pub space: CompositeSpace<T>,
    pub certificate: CertificateReport,
    /// `z_k - 1`.
    pub drift: T,
}

/// The truncated decomposition: components `1..=N` and the residual `f_N`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MixtureSpace<T: Real> {
    pub target: TargetDensity<T>,
    pub components: Vec<MixtureComponent<T>>,
    pub residual_weight: T,
    #[serde(skip)]
    residual: Option<TargetDensity<T>>,
}

fn at_level(level: usize) -> impl FnOnce(Error) -> Error {
    move |e| match e {
        Error::Certification { detail, .. } => Error::Certification { level, detail },
        other => Error::Level { level, source: Box::new(other) },
    }
}

/// One decomposition step: builds `g` for `f` and the renormalized residual `2f - g`.
pub fn split_level<T: Real>(f: &TargetDensity<T>, level: usize) -> Result<(MixtureComponent<T>, TargetDensity<T>)> {
    let zeta = T::lit(LEVEL_ZETA);
    let (params, g) = build_density(f, zeta).map_err(at_level(level))?;
    let certificate = certify_domination(&g, f, zeta).map_err(at_level(level))?;
    let space = build_composite(&params, f, DEFAULT_LEAF_CAP).map_err(at_level(level))?;
    let gp = g.to_piecewise().map_err(at_level(level))?;
    let raw = f.shape().combine(T::lit(2.0), &gp, -T::one()).map_err(at_level(level))?;
    let z = raw.integral();
    let next = TargetDensity::normalized(clamp_rounding(raw)?, f.eta()).map_err(at_level(level))?;
    let component = MixtureComponent {
        level,
        weight: T::exp2i(-(level as i32)),
        density: g,
        space,
        certificate,
        drift: z - T::one(),
    };
    Ok((component, next))
}

// `2f - g >= f/2` at every breakpoint once certified; negatives can only be rounding.
fn clamp_rounding<T: Real>(p: crate::piecewise::PiecewiseLinear<T>) -> Result<crate::piecewise::PiecewiseLinear<T>> {
    let tol = T::lit(64.0) * T::epsilon();
    let ys = p
        .values()
        .iter()
        .map(|&y| {
            if y >= T::zero() {
                Ok(y)
            } else if y > -tol {
                Ok(T::zero())
            } else {
                Err(Error::InvalidDensity(format!("residual value {y} < 0")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    crate::piecewise::PiecewiseLinear::new(p.breakpoints().to_vec(), ys)
}

/// Runs `levels` decomposition steps.
pub fn decompose<T: Real>(f: &TargetDensity<T>, levels: usize) -> Result<MixtureSpace<T>> {
    if levels == 0 {
        return Err(Error::InvalidParameter("levels must be >= 1".into()));
    }
    let mut current = f.clone();
    let mut components = Vec::with_capacity(levels);
    for level in 1..=levels {
        let (component, next) = split_level(&current, level)?;
        components.push(component);
        current = next;
    }
    Ok(MixtureSpace {
        target: f.clone(),
        components,
        residual_weight: T::exp2i(-(levels as i32)),
        residual: Some(current),
    })
}

impl<T: Real> MixtureSpace<T> {
    pub fn levels(&self) -> usize {
        self.components.len()
    }

    /// Piecewise-linear residual, present when built in this process.
    pub fn residual(&self) -> Option<&TargetDensity<T>> {
        self.residual.as_ref()
    }

    /// `f_N(x)` from the recursion `f_k = (2 f_{k-1} - g_k) / z_k`.
    pub fn residual_eval(&self, x: T) -> T {
        self.components
            .iter()
            .fold(self.target.eval(x), |acc, c| (T::lit(2.0) * acc - c.density.eval(x)) / (T::one() + c.drift))
    }

    /// CDF of `f_N` from the same recursion.
    pub fn residual_cdf(&self, x: T) -> T {
        let v = self
            .components
            .iter()
            .fold(self.target.cdf(x), |acc, c| (T::lit(2.0) * acc - c.density.cdf(x)) / (T::one() + c.drift));
        v.max(T::zero()).min(T::one())
    }

    /// Inverse CDF of `f_N` by bisection on the support of `f`.
    pub fn residual_quantile(&self, p: T) -> T {
        let (mut lo, mut hi) = (T::zero(), self.target.shape().end());
        for _ in 0..200 {
            let mid = (lo + hi) * T::lit(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.residual_cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// `Σ 2^{-k} g_k(x) + 2^{-N} f_N(x)`.
    pub fn reconstruct(&self, x: T) -> T {
        let parts: T = self.components.iter().map(|c| c.weight * c.density.eval(x)).sum();
        parts + self.residual_weight * self.residual_eval_stored(x)
    }

    fn residual_eval_stored(&self, x: T) -> T {
        match &self.residual {
            Some(r) => r.eval(x),
            None => self.residual_eval(x),
        }
    }

    /// Largest `|f - reconstruction|` over `grid`.
    pub fn reconstruction_error(&self, grid: &[T]) -> T {
        grid.iter().map(|&x| (self.target.eval(x) - self.reconstruct(x)).abs()).fold(T::zero(), T::max)
    }
}

impl<T: Real> Cdf<T> for MixtureSpace<T> {
    fn cdf(&self, x: T) -> T {
        let parts: T = self.components.iter().map(|c| c.weight * c.density.cdf(x)).sum();
        parts + self.residual_weight * self.residual_cdf(x)
    }
}

/// Draw counts per source in an annealed sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnealedReport {
    /// Draws from component `k` at index `k - 1`.
    pub component_draws: Vec<u64>,
    pub residual_draws: u64,
    /// Residual draws come from `f_N` itself rather than from a constructed space.
    pub residual_approximate: bool,
}

/// Picks a random space (component `k` with probability `2^{-k}`, the residual with
/// probability `2^{-N}`) and then a pair distance within it.
pub fn annealed_sample<T: Real>(
    m: &MixtureSpace<T>,
    count: usize,
    rng: &SamplerState,
) -> (EmpiricalSample<T>, AnnealedReport) {
    let n = m.levels();
    let draws = rng.chunked(count, |r| {
        let u = r.uniform();
        // component k covers [1 - 2^{1-k}, 1 - 2^{-k})
        let mut edge = 0.5;
        for (k, c) in m.components.iter().enumerate() {
            if u < 1.0 - edge {
                return (k, c.space.draw(r));
            }
            edge *= 0.5;
        }
        (n, m.residual_quantile(r.uniform_t()))
    });
    let mut component_draws = vec![0u64; n];
    let mut residual_draws = 0;
    let values = draws
        .into_iter()
        .map(|(k, v)| {
            if k < n {
                component_draws[k] += 1;
            } else {
                residual_draws += 1;
            }
            v
        })
        .collect();
    let report = AnnealedReport { component_draws, residual_draws, residual_approximate: true };
    (EmpiricalSample::new(values, rng.record()), report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::ks_statistic;

    fn triangle() -> TargetDensity<f64> {
        TargetDensity::new(vec![0.0, 2.0], vec![1.0, 0.0], 1.0).unwrap()
    }

    #[test]
    fn one_level_reconstructs() {
        let f = triangle();
        let m = decompose(&f, 1).unwrap();
        assert_eq!(m.residual_weight, 0.5);
        let grid: Vec<f64> = (0..=4000).map(|i| i as f64 / 2000.0).collect();
        assert!(m.reconstruction_error(&grid) <= 1e-8);
        let c = &m.components[0];
        assert!(c.drift.abs() <= 1e-8);
        assert!((c.density.integral() - 1.0).abs() <= 1e-9);
        let r = m.residual().unwrap();
        for (&x, &y) in r.shape().breakpoints().iter().zip(r.shape().values()) {
            if x > 0.0 && x <= f.eta() {
                assert!(y >= 0.5 * f.eval(x) * (1.0 - 1e-9), "x {x}");
            }
        }
    }

    #[test]
    fn implicit_residual_matches_stored() {
        let f = triangle();
        let m = decompose(&f, 1).unwrap();
        let r = m.residual().unwrap();
        for i in 0..300 {
            let x = i as f64 / 150.0 + 1e-4;
            assert!((m.residual_eval(x) - r.eval(x)).abs() <= 1e-9);
            assert!((m.residual_cdf(x) - r.cdf(x)).abs() <= 1e-9);
        }
        assert!((m.cdf(1.3) - f.cdf(1.3)).abs() <= 1e-9);
    }

    #[test]
    fn annealed_one_level_matches_target() {
        let f = triangle();
        let m = decompose(&f, 1).unwrap();
        let (s, rep) = annealed_sample(&m, 200_000, &SamplerState::default());
        assert_eq!(rep.component_draws[0] + rep.residual_draws, 200_000);
        let sd = (0.25f64 / 200_000.0).sqrt();
        assert!((rep.component_draws[0] as f64 / 200_000.0 - 0.5).abs() <= 3.0 * sd);
        assert!(ks_statistic(&s, &f) <= 0.005);
    }

    #[test]
    fn single_draw() {
        let m = decompose(&triangle(), 1).unwrap();
        let (s, _) = annealed_sample(&m, 1, &SamplerState::default());
        assert_eq!(s.len(), 1);
        assert!(s.values()[0] >= 0.0);
    }
}
