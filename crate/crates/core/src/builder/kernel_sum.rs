use crate::dyadic::triangle_phi;
use crate::scalar::Real;

use super::params::grid_count;

/// `Σ_{j=0}^{n²-4n} φ(n y - j/n - 2)` evaluated directly.
pub fn kernel_sum<T: Real>(n: usize, y: T) -> T {
    let nt = T::from_usize(n).unwrap();
    (0..grid_count(n)).map(|j| triangle_phi(nt * y - T::from_usize(j).unwrap() / nt - T::lit(2.0))).sum()
}

/// The kernel sum tabulated on its breakpoints `y = t/n²`, `t = 0..=n²`.
///
/// Every term `φ(n y - j/n - 2)` bends only at multiples of `1/n²`, so the table with
/// linear interpolation is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSumTable<T: Real> {
    n: usize,
    values: Vec<T>,
    cum: Vec<T>,
}

impl<T: Real> KernelSumTable<T> {
    pub fn new(n: usize) -> Self {
        let steps = n * n;
        let jc = grid_count(n);
        let nt = T::from_usize(n).unwrap();
        let values: Vec<T> = (0..=steps)
            .map(|t| {
                // only j with t - 4n < j < t - 2n contribute
                let lo = t.saturating_sub(4 * n);
                let hi = t.saturating_sub(2 * n).min(jc.saturating_sub(1));
                if t < 2 * n {
                    return T::zero();
                }
                (lo..=hi).map(|j| triangle_phi(T::from_i64(t as i64 - j as i64 - 2 * n as i64).unwrap() / nt)).sum()
            })
            .collect();
        let h = T::one() / T::from_usize(steps).unwrap();
        let mut cum = Vec::with_capacity(values.len());
        let mut acc = T::zero();
        cum.push(acc);
        for w in values.windows(2) {
            acc = acc + (w[0] + w[1]) * h * T::lit(0.5);
            cum.push(acc);
        }
        Self { n, values, cum }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of grid steps, `n²`.
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    /// Value at grid index `t`.
    #[inline]
    pub fn at(&self, t: usize) -> T {
        self.values[t]
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::zero(), T::max)
    }

    #[inline]
    pub fn eval(&self, y: T) -> T {
        if !(y > T::zero() && y < T::one()) {
            return T::zero();
        }
        let u = y * T::from_usize(self.steps()).unwrap();
        let t = u.floor().to_usize().unwrap().min(self.steps() - 1);
        let r = u - T::from_usize(t).unwrap();
        self.values[t] + (self.values[t + 1] - self.values[t]) * r
    }

    /// `∫_0^y` of the kernel sum.
    pub fn integral_to(&self, y: T) -> T {
        if y <= T::zero() {
            return T::zero();
        }
        if y >= T::one() {
            return self.cum[self.steps()];
        }
        let u = y * T::from_usize(self.steps()).unwrap();
        let t = u.floor().to_usize().unwrap().min(self.steps() - 1);
        let h = T::one() / T::from_usize(self.steps()).unwrap();
        let r = u - T::from_usize(t).unwrap();
        self.cum[t] + (self.values[t] + self.eval(y)) * r * h * T::lit(0.5)
    }

    pub fn integral(&self) -> T {
        self.cum[self.steps()]
    }
}
