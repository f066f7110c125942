use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SamplerState;
use crate::scalar::{atom_key, Real};

use super::metrics::Cdf;

/// A finitely supported target `p_0 δ_0 + p_1 δ_{d_1} + ... + p_k δ_{d_k}` with `d_0 = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAtoms<T>", into = "RawAtoms<T>")]
#[serde(bound = "T: Real")]
pub struct FiniteTarget<T: Real> {
    atoms: Vec<(T, T)>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct RawAtoms<T: Real> {
    atoms: Vec<(T, T)>,
}

impl<T: Real> TryFrom<RawAtoms<T>> for FiniteTarget<T> {
    type Error = Error;
    fn try_from(raw: RawAtoms<T>) -> Result<Self> {
        Self::new(raw.atoms)
    }
}

impl<T: Real> From<FiniteTarget<T>> for RawAtoms<T> {
    fn from(t: FiniteTarget<T>) -> Self {
        RawAtoms { atoms: t.atoms }
    }
}

impl<T: Real> FiniteTarget<T> {
    pub fn new(atoms: Vec<(T, T)>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidTarget(m));
        if atoms.is_empty() {
            return bad("no atoms".into());
        }
        if atoms[0].0 != T::zero() {
            return bad(format!("first distance must be exactly 0, got {}", atoms[0].0));
        }
        if atoms.iter().any(|&(d, p)| !d.is_finite() || !p.is_finite()) {
            return bad("non-finite distance or mass".into());
        }
        if atoms.windows(2).any(|w| w[1].0 <= w[0].0) {
            return bad("distances not strictly increasing".into());
        }
        let single = atoms.len() == 1;
        for &(d, p) in &atoms {
            let ok = if single { p > T::zero() } else { p > T::zero() && p < T::one() };
            if !ok {
                return bad(format!("mass {p} at distance {d} outside ]0,1["));
            }
        }
        let total: T = atoms.iter().map(|a| a.1).sum();
        if (total - T::one()).abs() > T::mass_tol() {
            return bad(format!("masses sum to {total}, not 1"));
        }
        Ok(Self { atoms })
    }

    /// The point mass at 0.
    pub fn dirac_zero() -> Self {
        Self { atoms: vec![(T::zero(), T::one())] }
    }

    pub fn atoms(&self) -> &[(T, T)] {
        &self.atoms
    }

    /// Number of non-zero atoms (the `k` of the target).
    pub fn k(&self) -> usize {
        self.atoms.len() - 1
    }

    pub fn max_distance(&self) -> T {
        self.atoms[self.atoms.len() - 1].0
    }

    pub fn to_discrete(&self) -> DiscreteDistribution<T> {
        DiscreteDistribution { atoms: self.atoms.clone() }
    }
}

/// A probability measure with finitely many atoms; the result of exact enumeration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DiscreteDistribution<T: Real> {
    atoms: Vec<(T, T)>,
}

impl<T: Real> DiscreteDistribution<T> {
    pub fn new(atoms: Vec<(T, T)>) -> Result<Self> {
        if atoms.iter().any(|&(v, m)| !v.is_finite() || v < T::zero() || !(m >= T::zero())) {
            return Err(Error::InvalidTarget("atoms must be finite, non-negative".into()));
        }
        if atoms.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidTarget("atom values not strictly increasing".into()));
        }
        let total: T = atoms.iter().map(|a| a.1).sum();
        if (total - T::one()).abs() > T::mass_tol() {
            return Err(Error::InvalidTarget(format!("masses sum to {total}, not 1")));
        }
        Ok(Self { atoms })
    }

    pub fn dirac(x: T) -> Self {
        Self { atoms: vec![(x, T::one())] }
    }

    /// Collects weighted values, merging locations equal after rounding to the atom tolerance.
    /// Masses are summed in iteration order; the first location seen represents the atom.
    pub fn from_weighted<I: IntoIterator<Item = (T, T)>>(items: I) -> Self {
        let mut merged: BTreeMap<i64, (T, T)> = BTreeMap::new();
        for (v, m) in items {
            let e = merged.entry(atom_key(v)).or_insert((v, T::zero()));
            e.1 = e.1 + m;
        }
        Self { atoms: merged.into_values().collect() }
    }

    pub fn atoms(&self) -> &[(T, T)] {
        &self.atoms
    }

    pub fn support(&self) -> Vec<T> {
        self.atoms.iter().map(|a| a.0).collect()
    }

    pub fn total_mass(&self) -> T {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// Mass at `x`, matching locations after rounding to the atom tolerance.
    pub fn mass_at(&self, x: T) -> T {
        let key = atom_key(x);
        self.atoms.iter().find(|a| atom_key(a.0) == key).map_or(T::zero(), |a| a.1)
    }

    /// Inverse-CDF draw.
    pub fn sample(&self, rng: &mut SamplerState) -> T {
        let u = rng.uniform_t::<T>() * self.total_mass();
        let mut acc = T::zero();
        for &(v, m) in &self.atoms {
            acc = acc + m;
            if u < acc {
                return v;
            }
        }
        self.atoms[self.atoms.len() - 1].0
    }
}

impl<T: Real> Cdf<T> for DiscreteDistribution<T> {
    fn cdf(&self, x: T) -> T {
        self.atoms.iter().take_while(|a| a.0 <= x).map(|a| a.1).sum()
    }

    fn cdf_left(&self, x: T) -> T {
        self.atoms.iter().take_while(|a| a.0 < x).map(|a| a.1).sum()
    }

    fn knots(&self) -> Vec<T> {
        self.support()
    }
}

impl<T: Real> Cdf<T> for FiniteTarget<T> {
    fn cdf(&self, x: T) -> T {
        self.atoms.iter().take_while(|a| a.0 <= x).map(|a| a.1).sum()
    }

    fn cdf_left(&self, x: T) -> T {
        self.atoms.iter().take_while(|a| a.0 < x).map(|a| a.1).sum()
    }

    fn knots(&self) -> Vec<T> {
        self.atoms.iter().map(|a| a.0).collect()
    }
}
