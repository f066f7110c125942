use serde::{Deserialize, Serialize};

use crate::distributions::TargetDensity;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Where a branching sequence came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KappaOrigin {
    Explicit,
    Envelope,
    Density,
}

/// Half-branching counts `κ_n >= 1`: every level-`n` node has `2κ_n` children.
///
/// Holds a finite prefix; levels past the end reuse the last value. Rule-generated
/// sequences are produced until the mass below the current level underflows, so the
/// reused value is never observable. `κ_n` may be `+inf` when `2^{n+1}` over a
/// density minimum overflows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKappas<T>", into = "RawKappas<T>")]
#[serde(bound = "T: Real")]
pub struct KappaSequence<T: Real> {
    values: Vec<T>,
    origin: KappaOrigin,
}

// JSON has no infinity: `null` stands for `κ = +inf`.
#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct RawKappas<T: Real> {
    values: Vec<Option<T>>,
    origin: KappaOrigin,
}

impl<T: Real> TryFrom<RawKappas<T>> for KappaSequence<T> {
    type Error = Error;
    fn try_from(raw: RawKappas<T>) -> Result<Self> {
        let values = raw.values.into_iter().map(|v| v.unwrap_or_else(T::infinity)).collect();
        Self::checked(values, raw.origin)
    }
}

impl<T: Real> From<KappaSequence<T>> for RawKappas<T> {
    fn from(k: KappaSequence<T>) -> Self {
        RawKappas { values: k.values.into_iter().map(|v| v.is_finite().then_some(v)).collect(), origin: k.origin }
    }
}

impl<T: Real> KappaSequence<T> {
    pub fn explicit(values: Vec<T>) -> Result<Self> {
        Self::checked(values, KappaOrigin::Explicit)
    }

    /// `κ ≡ c`.
    pub fn constant(c: T) -> Result<Self> {
        Self::explicit(vec![c])
    }

    fn checked(values: Vec<T>, origin: KappaOrigin) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidKappa("empty list".into()));
        }
        for (n, &k) in values.iter().enumerate() {
            if !(k >= T::one()) || (k.is_finite() && k.fract() != T::zero()) {
                return Err(Error::InvalidKappa(format!("kappa_{n} = {k} is not an integer >= 1")));
            }
        }
        Ok(Self { values, origin })
    }

    /// Generates `κ_n = rule(n)` until `Π_{p<=n} 2κ_p` overflows the tail or `max_levels` is hit.
    pub fn generate(origin: KappaOrigin, max_levels: usize, mut rule: impl FnMut(usize) -> Result<T>) -> Result<Self> {
        let mut values = Vec::new();
        let mut tail = T::one();
        for n in 0..max_levels.max(1) {
            let k = rule(n)?;
            values.push(k);
            tail = tail / (k + k);
            if tail == T::zero() {
                break;
            }
        }
        Self::checked(values, origin)
    }

    pub fn origin(&self) -> KappaOrigin {
        self.origin
    }

    pub fn prefix(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn kappa(&self, n: usize) -> T {
        self.values[n.min(self.values.len() - 1)]
    }
}

/// Interpolation rule between tabulated envelope points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    /// Linear in `x`; constant below the first point.
    Linear,
    /// Linear in `(log x, log F)`, i.e. a power law on each segment; the first
    /// segment's power law is continued below the first point.
    LogLog,
}

/// A tabulated non-decreasing function `F: ]0,∞[ -> ]0,1]`, constant past its last point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEnvelope<T>", into = "RawEnvelope<T>")]
#[serde(bound = "T: Real")]
pub struct EnvelopeFunction<T: Real> {
    xs: Vec<T>,
    ys: Vec<T>,
    interpolation: Interpolation,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct RawEnvelope<T: Real> {
    breakpoints: Vec<T>,
    values: Vec<T>,
    interpolation: Interpolation,
}

impl<T: Real> TryFrom<RawEnvelope<T>> for EnvelopeFunction<T> {
    type Error = Error;
    fn try_from(r: RawEnvelope<T>) -> Result<Self> {
        Self::new(r.breakpoints, r.values, r.interpolation)
    }
}

impl<T: Real> From<EnvelopeFunction<T>> for RawEnvelope<T> {
    fn from(e: EnvelopeFunction<T>) -> Self {
        RawEnvelope { breakpoints: e.xs, values: e.ys, interpolation: e.interpolation }
    }
}

impl<T: Real> EnvelopeFunction<T> {
    pub fn new(xs: Vec<T>, ys: Vec<T>, interpolation: Interpolation) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidEnvelope(m));
        if xs.is_empty() || xs.len() != ys.len() {
            return bad("need matching nonempty breakpoints and values".into());
        }
        if !(xs[0] > T::zero()) {
            return bad("breakpoints must be positive".into());
        }
        for w in xs.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return bad("breakpoints must be finite and strictly increasing".into());
            }
        }
        for &y in &ys {
            if !(y > T::zero() && y <= T::one()) {
                return bad(format!("value {y} outside ]0,1]"));
            }
        }
        if ys.windows(2).any(|w| w[1] < w[0]) {
            return bad("values must be non-decreasing".into());
        }
        Ok(Self { xs, ys, interpolation })
    }

    /// `min(1, x^power)`, represented exactly by two log-log points.
    pub fn power(power: T) -> Result<Self> {
        let half = T::lit(0.5);
        let two = T::lit(2.0);
        Self::new(vec![half, T::one(), two], vec![half.powf(power), T::one(), T::one()], Interpolation::LogLog)
    }

    pub fn eval(&self, x: T) -> T {
        let last = self.xs.len() - 1;
        if x >= self.xs[last] {
            return self.ys[last];
        }
        let i = self.xs.partition_point(|&b| b <= x);
        match self.interpolation {
            Interpolation::Linear => {
                if i == 0 {
                    return self.ys[0];
                }
                let (x0, x1, y0, y1) = (self.xs[i - 1], self.xs[i], self.ys[i - 1], self.ys[i]);
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
            Interpolation::LogLog => {
                if last == 0 {
                    return self.ys[0];
                }
                let seg = i.max(1) - 1;
                let (x0, x1, y0, y1) = (self.xs[seg], self.xs[seg + 1], self.ys[seg], self.ys[seg + 1]);
                let slope = (y1 / y0).log2() / (x1 / x0).log2();
                y0 * (x / x0).powf(slope)
            }
        }
    }
}

/// Default cap on rule-generated levels; past it the remaining tail mass is negligible
/// or the level scale `2^{n+1}` would overflow.
pub fn level_cap<T: Real>() -> usize {
    let max_exp = T::max_value().log2().floor().to_usize().unwrap_or(1000);
    (max_exp - 3).min(1100)
}

/// `κ_n = ⌈1 / F(2^{-n})⌉`.
pub fn select_kappa_envelope<T: Real>(f: &EnvelopeFunction<T>) -> Result<KappaSequence<T>> {
    KappaSequence::generate(KappaOrigin::Envelope, level_cap::<T>(), |n| {
        let x = T::exp2i(-(n as i32));
        let v = f.eval(x);
        if !(v > T::zero()) || !v.is_finite() {
            return Err(Error::InvalidEnvelope(format!("F({x}) = {v}")));
        }
        Ok((T::one() / v).ceil().max(T::one()))
    })
}

/// Minimum of `f` over `[min(x², η), η]`.
pub fn density_floor<T: Real>(f: &TargetDensity<T>, x: T) -> T {
    let eta = f.eta();
    f.shape().min_on((x * x).min(eta), eta)
}

/// `κ_n = max(1, ⌈2^{n+1} / g(2^{-n})⌉)` with `g` from [`density_floor`].
pub fn select_kappa_density<T: Real>(f: &TargetDensity<T>) -> Result<KappaSequence<T>> {
    KappaSequence::generate(KappaOrigin::Density, level_cap::<T>(), |n| {
        let x = T::exp2i(-(n as i32));
        let g = density_floor(f, x);
        if !(g > T::zero()) {
            return Err(Error::PositivityRadius(format!(
                "density minimum over [{}, {}] is zero",
                (x * x).min(f.eta()),
                f.eta()
            )));
        }
        Ok((T::exp2i(n as i32 + 1) / g).ceil().max(T::one()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_kappa_round_trips_as_null() {
        let k = KappaSequence::explicit(vec![2.0_f64, f64::INFINITY]).unwrap();
        let json = serde_json::to_string(&k).unwrap();
        assert_eq!(json, r#"{"values":[2.0,null],"origin":"explicit"}"#);
        let back: KappaSequence<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, k);
    }

    #[test]
    fn constant_envelope_gives_ones() {
        let f = EnvelopeFunction::new(vec![1.0_f64], vec![1.0], Interpolation::Linear).unwrap();
        let k = select_kappa_envelope(&f).unwrap();
        assert!(k.prefix().iter().all(|&v| v == 1.0));
        assert_eq!(k.kappa(5000), 1.0);
    }

    #[test]
    fn identity_envelope_doubles() {
        let f = EnvelopeFunction::power(1.0_f64).unwrap();
        let k = select_kappa_envelope(&f).unwrap();
        assert_eq!(&k.prefix()[..4], &[1.0, 2.0, 4.0, 8.0]);
        let sq = select_kappa_envelope(&EnvelopeFunction::power(2.0_f64).unwrap()).unwrap();
        assert_eq!(&sq.prefix()[..4], &[1.0, 4.0, 16.0, 64.0]);
    }

    #[test]
    fn envelope_validation() {
        assert!(EnvelopeFunction::new(vec![1.0_f64, 2.0], vec![0.5, 0.4], Interpolation::Linear).is_err());
        assert!(EnvelopeFunction::new(vec![1.0_f64], vec![0.0], Interpolation::Linear).is_err());
        assert!(EnvelopeFunction::new(vec![0.0_f64, 1.0], vec![0.5, 1.0], Interpolation::Linear).is_err());
    }

    #[test]
    fn uniform_density_gives_powers_of_two() {
        let f = TargetDensity::new(vec![0.0_f64, 1.0], vec![1.0, 1.0], 1.0).unwrap();
        let k = select_kappa_density(&f).unwrap();
        for (n, &v) in k.prefix().iter().enumerate() {
            assert_eq!(v, 2f64.powi(n as i32 + 1));
        }
    }

    #[test]
    fn larger_density_needs_no_more_branching() {
        let lo = TargetDensity::new(vec![0.0_f64, 2.0], vec![1.0, 0.0], 1.5).unwrap();
        let hi = TargetDensity::new(vec![0.0_f64, 1.0], vec![1.0, 1.0], 0.9).unwrap();
        // floor of hi is 1, floor of lo is at most 1
        let (a, b) = (select_kappa_density(&lo).unwrap(), select_kappa_density(&hi).unwrap());
        for n in 1..b.prefix().len().min(a.prefix().len()) {
            assert!(b.kappa(n) <= a.kappa(n), "level {n}");
        }
    }

    #[test]
    fn explicit_list_repeats_last() {
        let k = KappaSequence::explicit(vec![1.0_f64, 2.0, 4.0]).unwrap();
        assert_eq!(k.kappa(2), 4.0);
        assert_eq!(k.kappa(100), 4.0);
        assert!(KappaSequence::explicit(vec![0.5_f64]).is_err());
        assert!(KappaSequence::<f64>::explicit(vec![]).is_err());
    }
}
