use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Weights `m_1..m_j` in `]0,1[` with `Σ m_i = 1` and a prescribed `Σ m_i²`.
///
/// Stored in two-value form: the first `j - 1` weights equal `common`, the last is `last`.
/// Equal splits have `common == last == 1/j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct WeightSplit<T: Real> {
    j: usize,
    common: T,
    last: T,
}

impl<T: Real> WeightSplit<T> {
    pub fn j(&self) -> usize {
        self.j
    }

    pub fn weight(&self, i: usize) -> T {
        debug_assert!(i < self.j);
        if i + 1 == self.j {
            self.last
        } else {
            self.common
        }
    }

    pub fn weights(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.j).map(move |i| self.weight(i))
    }

    pub fn sum(&self) -> T {
        T::from_usize(self.j - 1).unwrap() * self.common + self.last
    }

    pub fn sum_of_squares(&self) -> T {
        T::from_usize(self.j - 1).unwrap() * self.common * self.common + self.last * self.last
    }
}

/// Finds weights summing to 1 whose squares sum to `s`.
///
/// Uses the smallest `j` with `1/j <= s`. When `1/j = s` the weights are equal;
/// otherwise `j - 1` weights equal the smaller root `a` of
/// `(j-1) j a² - 2 (j-1) a + (1 - s) = 0` and the last is `1 - (j-1) a`.
pub fn solve_weight_split<T: Real>(s: T) -> Result<WeightSplit<T>> {
    if !(s > T::zero() && s < T::one()) {
        return Err(Error::InvalidSquaredMass(s.to_f64_lossy()));
    }
    let one = T::one();
    let mut j = (one / s).ceil().to_usize().ok_or(Error::InvalidSquaredMass(s.to_f64_lossy()))?;
    // guard against 1/s rounding just above an integer
    if j > 1 && T::from_usize(j - 1).unwrap() * s >= one - T::mass_tol() * T::lit(1e-3) {
        j -= 1;
    }
    let jt = T::from_usize(j).unwrap();
    let excess = jt * s - one;
    if excess <= T::epsilon() * jt {
        let w = one / jt;
        return Ok(WeightSplit { j, common: w, last: w });
    }
    let jm1 = jt - one;
    let y = excess / jm1;
    // a = (1 - sqrt(y)) / j, rewritten to avoid cancellation as s -> 1
    let a = (one - s) / (jm1 * (one + y.sqrt()));
    Ok(WeightSplit { j, common: a, last: one - jm1 * a })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_weight_cases() {
        let w = solve_weight_split(0.25_f64).unwrap();
        assert_eq!(w.j(), 4);
        assert!(w.weights().all(|m| m == 0.25));
        let w = solve_weight_split(0.5_f64).unwrap();
        assert_eq!(w.j(), 2);
        assert!(w.weights().all(|m| m == 0.5));
    }

    #[test]
    fn two_value_case_from_quadratic_root() {
        let w = solve_weight_split(0.75_f64).unwrap();
        assert_eq!(w.j(), 2);
        let a = (1.0 - 0.5_f64.sqrt()) / 2.0;
        assert!((w.weight(0) - a).abs() < 1e-15);
        assert!((w.weight(0) - 0.146447).abs() < 1e-6);
        assert!((w.weight(1) - 0.853553).abs() < 1e-6);
        assert!((w.sum_of_squares() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn one_third_is_an_equal_split() {
        let w = solve_weight_split(1.0_f64 / 3.0).unwrap();
        assert_eq!(w.j(), 3);
        assert!((w.sum_of_squares() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_range() {
        for s in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(solve_weight_split(s), Err(Error::InvalidSquaredMass(_))));
        }
    }

    #[test]
    fn near_one_keeps_precision() {
        let s = 1.0_f64 - 1e-9;
        let w = solve_weight_split(s).unwrap();
        assert_eq!(w.j(), 2);
        assert!(w.weight(0) > 0.0);
        assert!((w.sum_of_squares() - s).abs() < 1e-15);
        assert!((w.sum() - 1.0).abs() < 1e-15);
    }
}
