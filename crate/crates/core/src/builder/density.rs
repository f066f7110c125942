use serde::{Deserialize, Serialize};

use crate::distributions::{Cdf, TargetDensity};
use crate::dyadic::{level_cap, psi_cdf, psi_density, DyadicModel, KappaSequence};
use crate::error::{Error, Result};
use crate::piecewise::PiecewiseLinear;
use crate::scalar::Real;

use super::kernel_sum::KernelSumTable;
use super::params::BuildParams;

/// The achieved pair-distance density `g`, in closed form.
///
/// On `[0, 4ε/n]` it is `p0 Ψ(x n/ε) n/ε`; on `[d_i, d_i + ε]` it is
/// `c_i S((x - d_i)/ε)` with `c_i = α f(d_i) n/#J` and `S` the tabulated kernel sum;
/// it vanishes elsewhere.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawBuilt<T>", into = "RawBuilt<T>")]
#[serde(bound = "T: Real")]
pub struct BuiltDensity<T: Real> {
    p0: T,
    scale: T,
    eps: T,
    model: DyadicModel<T>,
    ds: Vec<T>,
    coef: Vec<T>,
    table: KernelSumTable<T>,
    // cum_mass[i] = p0 + mass of intervals before i
    cum_mass: Vec<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct RawBuilt<T: Real> {
    p0: T,
    eps: T,
    n: usize,
    kappas: KappaSequence<T>,
    starts: Vec<T>,
    coefficients: Vec<T>,
}

impl<T: Real> TryFrom<RawBuilt<T>> for BuiltDensity<T> {
    type Error = Error;
    fn try_from(raw: RawBuilt<T>) -> Result<Self> {
        if raw.n < 4 || raw.starts.len() != raw.coefficients.len() || !(raw.eps > T::zero()) {
            return Err(Error::InvalidDensity("malformed built density".into()));
        }
        if raw.starts.windows(2).any(|w| w[1] - w[0] < raw.eps * (T::one() - T::lit(1e-9))) {
            return Err(Error::InvalidDensity("interval starts closer than eps".into()));
        }
        Ok(Self::from_parts(raw.p0, raw.eps, raw.n, raw.kappas, raw.starts, raw.coefficients))
    }
}

impl<T: Real> From<BuiltDensity<T>> for RawBuilt<T> {
    fn from(g: BuiltDensity<T>) -> Self {
        RawBuilt {
            p0: g.p0,
            eps: g.eps,
            n: g.table.n(),
            kappas: g.model.kappas().clone(),
            starts: g.ds,
            coefficients: g.coef,
        }
    }
}

impl<T: Real> BuiltDensity<T> {
    pub fn new(params: &BuildParams<T>, f: &TargetDensity<T>) -> Self {
        let n = T::from_usize(params.n).unwrap();
        let jc = T::from_usize(params.j_count).unwrap();
        let coef: Vec<T> = params.ds.iter().map(|&d| params.alpha * f.eval(d) * n / jc).collect();
        Self::from_parts(params.p0, params.eps, params.n, params.kappas.clone(), params.ds.clone(), coef)
    }

    /// Assembles `g` from its graft weight, interval starts and per-interval coefficients.
    pub fn from_parts(p0: T, eps: T, n: usize, kappas: KappaSequence<T>, ds: Vec<T>, coef: Vec<T>) -> Self {
        let table = KernelSumTable::new(n);
        let per_unit = eps * table.integral();
        let mut cum_mass = Vec::with_capacity(coef.len() + 1);
        let mut acc = p0;
        cum_mass.push(acc);
        for &c in &coef {
            acc = acc + c * per_unit;
            cum_mass.push(acc);
        }
        Self {
            p0,
            scale: eps / T::from_usize(n).unwrap(),
            eps,
            model: DyadicModel::new(kappas),
            ds,
            coef,
            table,
            cum_mass,
        }
    }

    /// Same construction with a different `p0` (other parts unchanged).
    pub fn with_p0(&self, p0: T) -> Self {
        let shift = p0 - self.p0;
        let mut out = self.clone();
        out.p0 = p0;
        out.cum_mass.iter_mut().for_each(|c| *c = *c + shift);
        out
    }

    pub fn p0(&self) -> T {
        self.p0
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn model(&self) -> &DyadicModel<T> {
        &self.model
    }

    pub fn starts(&self) -> &[T] {
        &self.ds
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coef
    }

    pub fn table(&self) -> &KernelSumTable<T> {
        &self.table
    }

    /// Right end of the graft part's support.
    pub fn graft_end(&self) -> T {
        T::lit(4.0) * self.scale
    }

    #[inline]
    pub fn graft_part(&self, x: T) -> T {
        if x >= self.graft_end() {
            return T::zero();
        }
        self.p0 * psi_density(&self.model, x / self.scale) / self.scale
    }

    /// Interval `i` containing `x`, if any.
    #[inline]
    pub fn interval_of(&self, x: T) -> Option<usize> {
        let i = self.ds.partition_point(|&d| d <= x).checked_sub(1)?;
        (x <= self.ds[i] + self.eps).then_some(i)
    }

    #[inline]
    pub fn eval(&self, x: T) -> T {
        if !(x > T::zero()) {
            return T::zero();
        }
        if x < self.graft_end() {
            return self.graft_part(x);
        }
        match self.interval_of(x) {
            Some(i) => self.coef[i] * self.table.eval((x - self.ds[i]) / self.eps),
            None => T::zero(),
        }
    }

    /// Exact total mass: `p0 ∫Ψ` plus the tabulated interval integrals.
    pub fn integral(&self) -> T {
        let psi_mass = T::one() - self.model.tail(self.model.depth());
        self.p0 * psi_mass + (self.cum_mass[self.cum_mass.len() - 1] - self.p0)
    }

    /// Breakpoints of the graft part, increasing, from `0` to [`Self::graft_end`].
    pub fn graft_breakpoints(&self) -> Vec<T> {
        let mut xs = vec![T::zero()];
        let depth = self.model.depth().min(level_cap::<T>());
        for m in (0..depth).rev() {
            let s = T::exp2i(-(m as i32 + 1)) * self.scale;
            for c in 4..8 {
                xs.push(s * T::from_i32(c).unwrap());
            }
        }
        xs.push(self.graft_end());
        xs.dedup();
        xs
    }

    /// Exact piecewise-linear representation on all breakpoints.
    pub fn to_piecewise(&self) -> Result<PiecewiseLinear<T>> {
        let mut xs = self.graft_breakpoints();
        let steps = self.table.steps();
        let step = self.eps / T::from_usize(steps).unwrap();
        for &d in &self.ds {
            for t in 0..=steps {
                xs.push(d + T::from_usize(t).unwrap() * step);
            }
        }
        let mut pts: Vec<(T, T)> = Vec::with_capacity(xs.len());
        for x in xs {
            if pts.last().is_none_or(|&(l, _)| x > l) {
                pts.push((x, self.eval(x)));
            }
        }
        let (xs, ys) = pts.into_iter().unzip();
        PiecewiseLinear::new(xs, ys)
    }
}

impl<T: Real> Cdf<T> for BuiltDensity<T> {
    fn cdf(&self, x: T) -> T {
        if !(x > T::zero()) {
            return T::zero();
        }
        if x < self.graft_end() {
            return self.p0 * psi_cdf(&self.model, x / self.scale);
        }
        let i = self.ds.partition_point(|&d| d <= x);
        if i == 0 {
            return self.p0;
        }
        let i = i - 1;
        let y = (x - self.ds[i]) / self.eps;
        self.cum_mass[i] + self.coef[i] * self.eps * self.table.integral_to(y)
    }
}
