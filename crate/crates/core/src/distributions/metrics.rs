//! Distances between distributions on the half line.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::{atom_key, Real};

use super::empirical::EmpiricalSample;
use super::finite::DiscreteDistribution;

/// A cumulative distribution function with left limits.
pub trait Cdf<T: Real> {
    /// `P(X <= x)`.
    fn cdf(&self, x: T) -> T;

    /// `P(X < x)`. Equal to `cdf` for continuous laws.
    fn cdf_left(&self, x: T) -> T {
        self.cdf(x)
    }

    /// Atom locations and breakpoints, for building comparison grids.
    fn knots(&self) -> Vec<T> {
        Vec::new()
    }
}

impl<T: Real, C: Cdf<T> + ?Sized> Cdf<T> for &C {
    fn cdf(&self, x: T) -> T {
        (**self).cdf(x)
    }
    fn cdf_left(&self, x: T) -> T {
        (**self).cdf_left(x)
    }
    fn knots(&self) -> Vec<T> {
        (**self).knots()
    }
}

/// Adapts a closure into a continuous [`Cdf`].
pub struct FnCdf<F>(pub F);

impl<T: Real, F: Fn(T) -> T> Cdf<T> for FnCdf<F> {
    fn cdf(&self, x: T) -> T {
        (self.0)(x)
    }
}

/// Sorted union of both knot sets, plus `extra`.
pub fn comparison_grid<T: Real>(a: &impl Cdf<T>, b: &impl Cdf<T>, extra: &[T]) -> Vec<T> {
    let mut g: Vec<T> = a.knots();
    g.extend(b.knots());
    g.extend_from_slice(extra);
    g.retain(|x| x.is_finite());
    g.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    g.dedup();
    g
}

/// `sup |F_a - F_b|` over the grid, checking both one-sided limits at each point.
pub fn kolmogorov_distance<T: Real>(a: &impl Cdf<T>, b: &impl Cdf<T>, grid: &[T]) -> Result<T> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    Ok(grid.iter().fold(T::zero(), |acc, &x| {
        let right = (a.cdf(x) - b.cdf(x)).abs();
        let left = (a.cdf_left(x) - b.cdf_left(x)).abs();
        acc.max(right).max(left)
    }))
}

/// Half the l1 distance between atom masses; locations are matched after rounding to the atom tolerance.
pub fn total_variation_atoms<T: Real>(a: &DiscreteDistribution<T>, b: &DiscreteDistribution<T>) -> T {
    let mut diff: BTreeMap<i64, T> = BTreeMap::new();
    let signed = a.atoms().iter().map(|&(v, m)| (v, m));
    let signed = signed.chain(b.atoms().iter().map(|&(v, m)| (v, -m)));
    for (v, m) in signed {
        let e = diff.entry(atom_key(v)).or_insert(T::zero());
        *e = *e + m;
    }
    diff.values().map(|d| d.abs()).sum::<T>() * T::lit(0.5)
}

/// One-sample Kolmogorov–Smirnov statistic `sup_x |F_emp(x) - F(x)|`.
///
/// Ties and atoms of `F` are handled by comparing both one-sided limits at every
/// distinct sample value.
pub fn ks_statistic<T: Real>(sample: &EmpiricalSample<T>, cdf: &impl Cdf<T>) -> T {
    let mut xs = sample.values().to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("sample values are finite"));
    let n = T::from_usize(xs.len()).expect("sample size");
    let mut d = T::zero();
    let mut i = 0;
    while i < xs.len() {
        let v = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == v {
            j += 1;
        }
        let below = T::from_usize(i).unwrap() / n;
        let upto = T::from_usize(j).unwrap() / n;
        d = d.max((upto - cdf.cdf(v)).abs());
        d = d.max((below - cdf.cdf_left(v)).abs());
        i = j;
    }
    d
}
