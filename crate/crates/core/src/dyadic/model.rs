use serde::{Deserialize, Serialize};

use crate::distributions::Cdf;
use crate::scalar::Real;

use super::kappa::{level_cap, KappaSequence};
use super::kernel::{triangle_cdf, triangle_phi};

/// The spherically symmetric tree with `2κ_n` children per level-`n` node and edge
/// lengths `2^{-(n+1)}` (odd child) or `2·2^{-(n+1)}` (even child), kept as level statistics.
///
/// `tail[n] = 1/Π_{p<n} 2κ_p` is the chance that two independent rays agree on the
/// first `n` levels; `weight[n] = tail[n] - tail[n+1]` is the chance they split at level `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "KappaSequence<T>", into = "KappaSequence<T>")]
#[serde(bound = "T: Real")]
pub struct DyadicModel<T: Real> {
    kappas: KappaSequence<T>,
    weight: Vec<T>,
    tail: Vec<T>,
}

impl<T: Real> From<KappaSequence<T>> for DyadicModel<T> {
    fn from(k: KappaSequence<T>) -> Self {
        Self::new(k)
    }
}

impl<T: Real> From<DyadicModel<T>> for KappaSequence<T> {
    fn from(m: DyadicModel<T>) -> Self {
        m.kappas
    }
}

impl<T: Real> DyadicModel<T> {
    /// Precomputes levels until the tail underflows or the level cap is hit.
    pub fn new(kappas: KappaSequence<T>) -> Self {
        let cap = level_cap::<T>();
        let mut tail = vec![T::one()];
        let mut weight = Vec::new();
        for n in 0..cap {
            let t = tail[n];
            let k = kappas.kappa(n);
            let next = t / (k + k);
            weight.push(t - next);
            tail.push(next);
            if next == T::zero() {
                break;
            }
        }
        Self { kappas, weight, tail }
    }

    pub fn kappas(&self) -> &KappaSequence<T> {
        &self.kappas
    }

    /// Number of precomputed levels.
    pub fn depth(&self) -> usize {
        self.weight.len()
    }

    pub fn weight(&self, n: usize) -> T {
        self.weight.get(n).copied().unwrap_or(T::zero())
    }

    pub fn tail(&self, n: usize) -> T {
        self.tail.get(n).copied().unwrap_or(*self.tail.last().unwrap())
    }

    /// Mixing coefficients `(a, b, a)` of the three kernels of level `n`:
    /// both odd, one even, both even among ordered pairs of distinct children.
    pub fn level_coefficients(&self, n: usize) -> (T, T) {
        let r = T::one() / self.kappas.kappa(n);
        let two = T::lit(2.0);
        let a = (T::one() - r) / (two * (two - r));
        let b = T::one() / (two - r);
        (a, b)
    }

    /// Level containing `x` in its support `[2^{1-n}, 2^{2-n}]`; `None` for `x` outside `]0, 4[`.
    pub fn level_of(&self, x: T) -> Option<usize> {
        if !(x > T::zero() && x < T::lit(4.0)) {
            return None;
        }
        let mut n = (T::lit(4.0) / x).log2().floor().to_i64().unwrap_or(1100).clamp(0, 1100) as usize;
        // fix rounding of log2 near powers of two
        while n > 0 && x > T::exp2i(2 - n as i32) {
            n -= 1;
        }
        while x < T::exp2i(1 - n as i32) {
            n += 1;
        }
        Some(n)
    }
}

/// Density of the pair distance given a split at level `n`.
pub fn psi_n<T: Real>(model: &DyadicModel<T>, n: usize, x: T) -> T {
    let s = T::exp2i(n as i32 + 1);
    let y = s * x;
    let (a, b) = model.level_coefficients(n);
    s * (a * triangle_phi(y - T::lit(4.0)) + b * triangle_phi(y - T::lit(5.0)) + a * triangle_phi(y - T::lit(6.0)))
}

/// Distribution function of [`psi_n`].
pub fn psi_n_cdf<T: Real>(model: &DyadicModel<T>, n: usize, x: T) -> T {
    let y = T::exp2i(n as i32 + 1) * x;
    let (a, b) = model.level_coefficients(n);
    a * triangle_cdf(y - T::lit(4.0)) + b * triangle_cdf(y - T::lit(5.0)) + a * triangle_cdf(y - T::lit(6.0))
}

/// Pair-distance density `Σ_n weight[n] ψ_n(x)`; at most two adjacent levels are nonzero.
pub fn psi_density<T: Real>(model: &DyadicModel<T>, x: T) -> T {
    let Some(n) = model.level_of(x) else {
        return T::zero();
    };
    let mut v = T::zero();
    for m in n.saturating_sub(1)..=n + 1 {
        let w = model.weight(m);
        if w > T::zero() {
            v = v + w * psi_n(model, m, x);
        }
    }
    v
}

/// `P(D <= eps)` in closed form: the tail below level `n` plus the partial integral of level `n`.
pub fn psi_cdf<T: Real>(model: &DyadicModel<T>, eps: T) -> T {
    if !(eps > T::zero()) {
        return T::zero();
    }
    if eps >= T::lit(4.0) {
        return T::one();
    }
    let n = model.level_of(eps).expect("eps in ]0,4[");
    if n >= model.depth() {
        return model.tail(model.depth());
    }
    model.tail(n + 1) + model.weight(n) * psi_n_cdf(model, n, eps)
}

impl<T: Real> Cdf<T> for DyadicModel<T> {
    fn cdf(&self, x: T) -> T {
        psi_cdf(self, x)
    }
}
