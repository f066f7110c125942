use serde::{Deserialize, Serialize};

use crate::distributions::TargetDensity;
use crate::dyadic::{psi_density, select_kappa_density, DyadicModel, KappaSequence};
use crate::error::{Error, Result};
use crate::piecewise::{merge_sorted, PiecewiseLinear};
use crate::scalar::Real;

/// Default cap on the number of covering intervals `k`.
pub const DEFAULT_INTERVAL_CAP: usize = 10_000_000;

/// Margin knobs and the constant bounding `g / f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MarginParams<T: Real> {
    pub beta: T,
    pub n: usize,
    pub constant: T,
}

/// `(1-3β)^{-1} (1-β)^{-1} n²/(n²-4n+1) (1+3/n)`.
pub fn margin_constant<T: Real>(beta: T, n: usize) -> T {
    let one = T::one();
    let nt = T::from_usize(n).unwrap();
    let jc = T::from_usize(grid_count(n)).unwrap();
    one / (one - T::lit(3.0) * beta) / (one - beta) * (nt * nt / jc) * (one + T::lit(3.0) / nt)
}

/// `#J_n = n² - 4n + 1`.
pub fn grid_count(n: usize) -> usize {
    n * n - 4 * n + 1
}

/// `β = min(1/6, ζ/24)` and the smallest `n >= 4` with `margin_constant(β, n) <= 1 + ζ`.
pub fn choose_margin_params<T: Real>(zeta: T) -> Result<MarginParams<T>> {
    if !(zeta > T::zero()) || !zeta.is_finite() {
        return Err(Error::InvalidParameter(format!("zeta = {zeta} must be positive")));
    }
    let beta = (T::one() / T::lit(6.0)).min(zeta / T::lit(24.0));
    let mut n = 4;
    loop {
        let c = margin_constant(beta, n);
        if c <= T::one() + zeta {
            return Ok(MarginParams { beta, n, constant: c });
        }
        n += 1;
    }
}

/// Every choice made by the density construction.
///
/// All `α_i` are equal, so a single `alpha` is stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BuildParams<T: Real> {
    pub beta: T,
    pub n: usize,
    pub kappa_lo: T,
    pub k_hi: T,
    pub b_set: Vec<(T, T)>,
    pub eps: T,
    pub p0: T,
    pub ds: Vec<T>,
    pub alpha: T,
    pub j_count: usize,
    pub kappas: KappaSequence<T>,
}

impl<T: Real> BuildParams<T> {
    pub fn k(&self) -> usize {
        self.ds.len()
    }

    /// Distance scale of the grafts, `ε / n`.
    pub fn scale(&self) -> T {
        self.eps / T::from_usize(self.n).unwrap()
    }

    pub fn alpha_bound(&self) -> T {
        T::one() / (T::one() - T::lit(3.0) * self.beta)
    }

    /// Mass `α ε f(d_i)` carried by interval `i`.
    pub fn interval_masses(&self, f: &TargetDensity<T>) -> Vec<T> {
        self.ds.iter().map(|&d| self.alpha * self.eps * f.eval(d)).collect()
    }

    /// Re-verifies every structural property against `f`.
    pub fn check(&self, f: &TargetDensity<T>) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        let tol = T::mass_tol();
        if !(self.beta > T::zero() && self.beta < T::one() / T::lit(3.0)) || self.n < 4 {
            return bad(format!("beta = {}, n = {}", self.beta, self.n));
        }
        let inner = f.shape().integral_to(self.k_hi) - f.shape().integral_to(self.kappa_lo);
        if inner < T::one() - self.beta - tol {
            return bad(format!("mass between kappa and K is {inner} < 1 - beta"));
        }
        let b = superlevel_set(f.shape(), self.kappa_lo, self.k_hi, self.beta / self.k_hi);
        if b != self.b_set {
            return bad("B does not match the superlevel set of f".into());
        }
        if self.eps > f.eta().min(self.kappa_lo) {
            return bad(format!("eps = {} exceeds eta ∧ kappa", self.eps));
        }
        let modulus = f.shape().modulus_bound(T::zero(), self.k_hi + self.eps, self.eps);
        if modulus > self.beta * self.beta / self.k_hi {
            return bad(format!("modulus {modulus} at eps exceeds beta²/K"));
        }
        let eps_slack = self.eps * (T::one() - T::lit(1e-9));
        if self.ds.windows(2).any(|w| w[1] - w[0] < eps_slack) {
            return bad("covering points closer than eps".into());
        }
        // sweep B left to right, extending coverage one interval at a time
        let mut di = 0;
        for &(lo, hi) in &self.b_set {
            let mut x = lo;
            loop {
                while di < self.ds.len() && self.ds[di] + self.eps < x {
                    di += 1;
                }
                if di == self.ds.len() || self.ds[di] > x + self.eps - eps_slack {
                    return bad(format!("point {x} of B is not covered"));
                }
                x = self.ds[di] + self.eps;
                if x >= hi {
                    break;
                }
                di += 1;
            }
        }
        if T::from_usize(self.k()).unwrap() * self.eps > self.k_hi + tol {
            return bad("k eps exceeds K".into());
        }
        let masses: T = self.interval_masses(f).into_iter().sum();
        if (self.p0 + masses - T::one()).abs() > tol {
            return bad(format!("p0 + Σ α ε f(d_i) = {}", self.p0 + masses));
        }
        if !(self.alpha > T::zero() && self.alpha < self.alpha_bound()) {
            return bad(format!("alpha = {} outside ]0, {}[", self.alpha, self.alpha_bound()));
        }
        if !(self.p0 > T::zero() && self.p0 < T::one()) {
            return bad(format!("p0 = {}", self.p0));
        }
        if self.j_count != grid_count(self.n) {
            return bad("#J_n mismatch".into());
        }
        Ok(())
    }
}

/// `{x in [lo, hi] : f(x) >= t}` as sorted disjoint closed intervals.
pub fn superlevel_set<T: Real>(f: &PiecewiseLinear<T>, lo: T, hi: T, t: T) -> Vec<(T, T)> {
    let xs = f.breakpoints();
    let mut out: Vec<(T, T)> = Vec::new();
    let mut push = |a: T, b: T| match out.last_mut() {
        Some(last) if last.1 >= a => last.1 = last.1.max(b),
        _ => out.push((a, b)),
    };
    for w in xs.windows(2) {
        let a = w[0].max(lo);
        let b = w[1].min(hi);
        if a > b {
            continue;
        }
        let (ya, yb) = (f.eval(a), f.eval(b));
        match (ya >= t, yb >= t) {
            (true, true) => push(a, b),
            (true, false) => push(a, (a + (ya - t) / (ya - yb) * (b - a)).min(b)),
            (false, true) => push((a + (t - ya) / (yb - ya) * (b - a)).max(a), b),
            (false, false) => {}
        }
    }
    out
}

/// Left ends of a greedy cover of `b_set` by closed intervals of length `eps`.
pub fn greedy_cover<T: Real>(b_set: &[(T, T)], eps: T) -> Vec<T> {
    let mut ds = Vec::new();
    let mut iv = 0;
    let Some(&(first, _)) = b_set.first() else {
        return ds;
    };
    // points inside one run are anchor + m eps, avoiding accumulated rounding
    let (mut anchor, mut m) = (first, 0usize);
    loop {
        let d = anchor + T::from_usize(m).unwrap() * eps;
        ds.push(d);
        let covered = d + eps;
        while iv < b_set.len() && b_set[iv].1 <= covered {
            iv += 1;
        }
        if iv == b_set.len() {
            return ds;
        }
        if b_set[iv].0 > covered {
            anchor = b_set[iv].0;
            m = 0;
        } else {
            m += 1;
        }
    }
}

/// Largest `p` with `p Ψ(y) <= (ε/n) f((ε/n) y)` for all `y in ]0,4]`.
///
/// Both sides are piecewise linear in `y`, so the ratio is monotone between merged
/// breakpoints and its infimum is attained at one of them.
pub fn p0_ceiling<T: Real>(f: &TargetDensity<T>, model: &DyadicModel<T>, scale: T) -> T {
    let mut psi_pts = Vec::new();
    for m in (0..model.depth()).rev() {
        if model.weight(m) == T::zero() {
            continue;
        }
        let s = T::exp2i(-(m as i32 + 1));
        psi_pts.extend((4..=8).map(|c| s * T::from_i32(c).unwrap()));
    }
    psi_pts.dedup();
    let mut f_pts: Vec<T> =
        f.shape().breakpoints().iter().map(|&b| b / scale).filter(|&y| y > T::zero() && y < T::lit(4.0)).collect();
    f_pts.dedup();
    let mut best = T::infinity();
    for y in merge_sorted(&psi_pts, &f_pts) {
        let psi = psi_density(model, y);
        if psi > T::zero() {
            best = best.min(scale * f.eval(scale * y) / psi);
        }
    }
    best
}

/// Runs every parameter choice of the construction for `f` at margins `(β, n)`.
pub fn derive_params<T: Real>(f: &TargetDensity<T>, beta: T, n: usize) -> Result<BuildParams<T>> {
    derive_params_capped(f, beta, n, DEFAULT_INTERVAL_CAP)
}

pub fn derive_params_capped<T: Real>(
    f: &TargetDensity<T>,
    beta: T,
    n: usize,
    interval_cap: usize,
) -> Result<BuildParams<T>> {
    if !(beta > T::zero() && beta < T::one() / T::lit(3.0)) {
        return Err(Error::InvalidParameter(format!("beta = {beta} outside ]0, 1/3[")));
    }
    if n < 4 {
        return Err(Error::InvalidParameter(format!("n = {n} < 4")));
    }
    let half_beta = beta * T::lit(0.5);
    let kappa_lo = f.quantile(half_beta);
    let k_hi = f.quantile(T::one() - half_beta);
    if !(kappa_lo > T::zero() && k_hi > kappa_lo) {
        return Err(Error::InvalidParameter(format!("degenerate quantiles {kappa_lo}, {k_hi}")));
    }
    let b_set = superlevel_set(f.shape(), kappa_lo, k_hi, beta / k_hi);
    if b_set.is_empty() {
        return Err(Error::InvalidParameter("B is empty".into()));
    }

    let tol = beta * beta / k_hi;
    let mut eps = f.eta().min(kappa_lo);
    let mut tries = 0;
    while f.shape().modulus_bound(T::zero(), k_hi + eps, eps) > tol {
        eps = eps * T::lit(0.5);
        tries += 1;
        if tries > 2000 || eps == T::zero() {
            return Err(Error::EpsilonSearch(format!("no eps with modulus <= {tol}")));
        }
    }

    let b_measure: T = b_set.iter().map(|&(a, b)| b - a).sum();
    let projected = (b_measure / eps).to_f64_lossy() + b_set.len() as f64;
    if projected > interval_cap as f64 {
        return Err(Error::TooLarge { what: "covering intervals", projected, cap: interval_cap as f64 });
    }

    let kappas = select_kappa_density(f)?;
    let model = DyadicModel::new(kappas.clone());
    let scale = eps / T::from_usize(n).unwrap();
    let ceiling = p0_ceiling(f, &model, scale);
    if !(ceiling > T::zero()) || !ceiling.is_finite() {
        return Err(Error::P0NotFound(format!("ratio infimum {ceiling}")));
    }
    let p0 = (ceiling * T::lit(0.5)).min(T::lit(0.5));

    let ds = greedy_cover(&b_set, eps);
    let total: T = ds.iter().map(|&d| eps * f.eval(d)).sum();
    let alpha = (T::one() - p0) / total;
    let bound = T::one() / (T::one() - T::lit(3.0) * beta);
    if !(alpha < bound) {
        return Err(Error::AlphaBound { alpha: alpha.to_f64_lossy(), bound: bound.to_f64_lossy() });
    }
    Ok(BuildParams { beta, n, kappa_lo, k_hi, b_set, eps, p0, ds, alpha, j_count: grid_count(n), kappas })
}
