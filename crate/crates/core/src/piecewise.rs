//! Continuous piecewise-linear functions on the half line, zero outside their breakpoint range.
//!
//! Every density the crate builds is exactly of this form, so integrals, quantiles and
//! minima are computed in closed form rather than by quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPiecewise<T>", into = "RawPiecewise<T>")]
#[serde(bound = "T: Real")]
pub struct PiecewiseLinear<T: Real> {
    xs: Vec<T>,
    ys: Vec<T>,
    // cum[i] = integral from xs[0] to xs[i]
    cum: Vec<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct RawPiecewise<T: Real> {
    breakpoints: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> TryFrom<RawPiecewise<T>> for PiecewiseLinear<T> {
    type Error = Error;
    fn try_from(raw: RawPiecewise<T>) -> Result<Self> {
        Self::new(raw.breakpoints, raw.values)
    }
}

impl<T: Real> From<PiecewiseLinear<T>> for RawPiecewise<T> {
    fn from(p: PiecewiseLinear<T>) -> Self {
        RawPiecewise { breakpoints: p.xs, values: p.ys }
    }
}

impl<T: Real> PiecewiseLinear<T> {
    pub fn new(xs: Vec<T>, ys: Vec<T>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidDensity(format!("{} breakpoints but {} values", xs.len(), ys.len())));
        }
        if xs.len() < 2 {
            return Err(Error::InvalidDensity("need at least two breakpoints".into()));
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidDensity("non-finite breakpoint or value".into()));
        }
        if xs[0] < T::zero() {
            return Err(Error::InvalidDensity("negative breakpoint".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidDensity("breakpoints not strictly increasing".into()));
        }
        let mut cum = Vec::with_capacity(xs.len());
        let mut acc = T::zero();
        cum.push(acc);
        let half = T::lit(0.5);
        for i in 1..xs.len() {
            acc = acc + (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]) * half;
            cum.push(acc);
        }
        Ok(Self { xs, ys, cum })
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.xs
    }

    pub fn values(&self) -> &[T] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn start(&self) -> T {
        self.xs[0]
    }

    pub fn end(&self) -> T {
        self.xs[self.xs.len() - 1]
    }

    /// Index `i` of the segment `[xs[i], xs[i+1]]` containing `x` (clamped).
    fn segment(&self, x: T) -> usize {
        let i = self.xs.partition_point(|&b| b <= x);
        i.saturating_sub(1).min(self.xs.len() - 2)
    }

    pub fn eval(&self, x: T) -> T {
        if x < self.start() || x > self.end() || x.is_nan() {
            return T::zero();
        }
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let t = (x - x0) / (x1 - x0);
        y0 + (y1 - y0) * t
    }

    /// [`Self::eval`] for non-decreasing queries: `cursor` remembers the last segment.
    #[inline]
    pub fn eval_seq(&self, x: T, cursor: &mut usize) -> T {
        if x < self.start() || x > self.end() || x.is_nan() {
            return T::zero();
        }
        let last = self.xs.len() - 2;
        if *cursor > last || self.xs[*cursor] > x {
            *cursor = self.segment(x);
        }
        while *cursor < last && self.xs[*cursor + 1] <= x {
            *cursor += 1;
        }
        let i = *cursor;
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let t = (x - x0) / (x1 - x0);
        y0 + (y1 - y0) * t
    }

    /// Exact integral over the half line.
    pub fn integral(&self) -> T {
        self.cum[self.cum.len() - 1]
    }

    /// Exact integral over `[0, x]`.
    pub fn integral_to(&self, x: T) -> T {
        if x <= self.start() {
            return T::zero();
        }
        if x >= self.end() {
            return self.integral();
        }
        let i = self.segment(x);
        let y = self.eval(x);
        self.cum[i] + (x - self.xs[i]) * (self.ys[i] + y) * T::lit(0.5)
    }

    /// Smallest `x` with `integral_to(x) = target`, for non-negative functions.
    pub fn inverse_integral(&self, target: T) -> T {
        if target <= T::zero() {
            return self.start();
        }
        let total = self.integral();
        if target >= total {
            // last point where mass is still being added
            let mut j = self.xs.len() - 1;
            while j > 0 && self.cum[j - 1] >= total {
                j -= 1;
            }
            return self.xs[j];
        }
        let i = self.cum.partition_point(|&c| c < target).max(1) - 1;
        let r = target - self.cum[i];
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let slope = (y1 - y0) / (x1 - x0);
        let disc = (y0 * y0 + T::lit(2.0) * slope * r).max(T::zero());
        let denom = y0 + disc.sqrt();
        let t = if denom > T::zero() { T::lit(2.0) * r / denom } else { T::zero() };
        (x0 + t).min(x1)
    }

    /// Minimum over the closed interval `[a, b]` (values outside the range count as 0).
    pub fn min_on(&self, a: T, b: T) -> T {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let mut m = self.eval(a).min(self.eval(b));
        if a < self.start() || b > self.end() {
            m = m.min(T::zero());
        }
        let lo = self.xs.partition_point(|&x| x < a);
        let hi = self.xs.partition_point(|&x| x <= b);
        for &y in &self.ys[lo..hi] {
            m = m.min(y);
        }
        m
    }

    /// Largest `|slope|` over segments meeting `[a, b]`.
    pub fn max_abs_slope_on(&self, a: T, b: T) -> T {
        let mut m = T::zero();
        for i in 0..self.xs.len() - 1 {
            if self.xs[i + 1] < a || self.xs[i] > b {
                continue;
            }
            let s = ((self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])).abs();
            m = m.max(s);
        }
        m
    }

    /// Sum of the jumps of the function (as a function on the half line) inside `[a, b]`.
    pub fn jumps_on(&self, a: T, b: T) -> T {
        let mut j = T::zero();
        if self.start() > T::zero() && self.start() >= a && self.start() <= b {
            j = j + self.ys[0].abs();
        }
        if self.end() >= a && self.end() < b {
            j = j + self.ys[self.ys.len() - 1].abs();
        }
        j
    }

    /// Upper bound on `sup |f(x) - f(y)|` over `x, y in [a, b]` with `|x - y| <= delta`.
    pub fn modulus_bound(&self, a: T, b: T, delta: T) -> T {
        self.max_abs_slope_on(a, b) * delta + self.jumps_on(a, b)
    }

    /// `ca * self + cb * other` on the merged breakpoints.
    pub fn combine(&self, ca: T, other: &Self, cb: T) -> Result<Self> {
        let xs = merge_sorted(&self.xs, &other.xs);
        let ys = xs.iter().map(|&x| ca * self.eval(x) + cb * other.eval(x)).collect();
        Self::new(xs, ys)
    }

    pub fn scaled(&self, c: T) -> Self {
        let ys = self.ys.iter().map(|&y| y * c).collect();
        Self::new(self.xs.clone(), ys).expect("scaling preserves validity")
    }
}

/// Union of two sorted slices with duplicates removed.
pub(crate) fn merge_sorted<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = if j >= b.len() || (i < a.len() && a[i] <= b[j]) {
            i += 1;
            a[i - 1]
        } else {
            j += 1;
            b[j - 1]
        };
        if out.last().is_none_or(|&l| next > l) {
            out.push(next);
        }
    }
    out
}
