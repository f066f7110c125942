use crate::scalar::Real;

/// Density of `U1 + U2` for independent uniforms on `[0,1]`.
#[inline]
pub fn triangle_phi<T: Real>(x: T) -> T {
    let one = T::one();
    if x <= T::zero() || x >= one + one {
        T::zero()
    } else if x <= one {
        x
    } else {
        one + one - x
    }
}

/// Distribution function of [`triangle_phi`].
#[inline]
pub fn triangle_cdf<T: Real>(x: T) -> T {
    let one = T::one();
    let two = one + one;
    let half = T::lit(0.5);
    if x <= T::zero() {
        T::zero()
    } else if x <= one {
        half * x * x
    } else if x < two {
        let r = two - x;
        one - half * r * r
    } else {
        one
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_values() {
        assert_eq!(triangle_phi(1.0_f64), 1.0);
        assert_eq!(triangle_phi(-0.5_f64), 0.0);
        assert_eq!(triangle_phi(1.25_f64), 0.75);
        assert_eq!(triangle_phi(2.0_f64), 0.0);
        assert_eq!(triangle_phi(0.0_f64), 0.0);
    }

    #[test]
    fn cdf_matches_integral() {
        assert_eq!(triangle_cdf(1.0_f64), 0.5);
        assert_eq!(triangle_cdf(2.0_f64), 1.0);
        let n = 100_000;
        let h = 2.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let x = (i as f64 + 0.5) * h;
            acc += triangle_phi(x) * h;
            if i % 1000 == 999 {
                assert!((acc - triangle_cdf((i + 1) as f64 * h)).abs() < 1e-9);
            }
        }
    }
}
