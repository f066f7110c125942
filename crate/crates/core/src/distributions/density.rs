use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::piecewise::PiecewiseLinear;
use crate::rng::SamplerState;
use crate::scalar::Real;

use super::metrics::Cdf;

/// A continuous piecewise-linear probability density `f` on the half line,
/// strictly positive on `]0, eta]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDensity<T>", into = "RawDensity<T>")]
#[serde(bound = "T: Real")]
pub struct TargetDensity<T: Real> {
    shape: PiecewiseLinear<T>,
    eta: T,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct RawDensity<T: Real> {
    breakpoints: Vec<T>,
    values: Vec<T>,
    eta: T,
}

impl<T: Real> TryFrom<RawDensity<T>> for TargetDensity<T> {
    type Error = Error;
    fn try_from(raw: RawDensity<T>) -> Result<Self> {
        Self::new(raw.breakpoints, raw.values, raw.eta)
    }
}

impl<T: Real> From<TargetDensity<T>> for RawDensity<T> {
    fn from(d: TargetDensity<T>) -> Self {
        RawDensity { breakpoints: d.shape.breakpoints().to_vec(), values: d.shape.values().to_vec(), eta: d.eta }
    }
}

impl<T: Real> TargetDensity<T> {
    pub fn new(breakpoints: Vec<T>, values: Vec<T>, eta: T) -> Result<Self> {
        let shape = PiecewiseLinear::new(breakpoints, values)?;
        Self::from_shape(shape, eta)
    }

    pub fn from_shape(shape: PiecewiseLinear<T>, eta: T) -> Result<Self> {
        if shape.values().iter().any(|&v| v < T::zero()) {
            return Err(Error::InvalidDensity("negative density value".into()));
        }
        let total = shape.integral();
        if (total - T::one()).abs() > T::integral_tol() {
            return Err(Error::InvalidDensity(format!("integral is {total}, not 1")));
        }
        if !(eta > T::zero()) || !eta.is_finite() {
            return Err(Error::InvalidDensity(format!("positivity radius {eta} must be positive")));
        }
        if shape.start() > T::zero() {
            return Err(Error::InvalidDensity(
                "density vanishes on a neighbourhood of 0 (first breakpoint > 0)".into(),
            ));
        }
        // linear between checked points, so positivity at these points covers ]0, eta]
        let interior = shape.breakpoints().iter().copied().filter(|&b| b > T::zero() && b <= eta);
        for x in interior.chain(std::iter::once(eta)) {
            if !(shape.eval(x) > T::zero()) {
                return Err(Error::InvalidDensity(format!("density not positive at {x} inside ]0, eta = {eta}]")));
            }
        }
        Ok(Self { shape, eta })
    }

    /// Renormalizes a non-negative piecewise-linear function to integral 1.
    pub fn normalized(shape: PiecewiseLinear<T>, eta: T) -> Result<Self> {
        let total = shape.integral();
        if !(total > T::zero()) {
            return Err(Error::InvalidDensity("zero total mass".into()));
        }
        Self::from_shape(shape.scaled(T::one() / total), eta)
    }

    pub fn shape(&self) -> &PiecewiseLinear<T> {
        &self.shape
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    #[inline]
    pub fn eval(&self, x: T) -> T {
        self.shape.eval(x)
    }

    pub fn quantile(&self, p: T) -> T {
        self.shape.inverse_integral(p * self.shape.integral())
    }

    /// Inverse-CDF draw.
    pub fn sample(&self, rng: &mut SamplerState) -> T {
        self.quantile(rng.uniform_t())
    }
}

impl<T: Real> Cdf<T> for TargetDensity<T> {
    fn cdf(&self, x: T) -> T {
        self.shape.integral_to(x) / self.shape.integral()
    }

    fn knots(&self) -> Vec<T> {
        self.shape.breakpoints().to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_triangle() {
        let f = TargetDensity::new(vec![0.0_f64, 2.0], vec![1.0, 0.0], 1.5).unwrap();
        assert!((f.cdf(2.0) - 1.0).abs() < 1e-15);
        assert!((f.quantile(0.75) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_violations() {
        // wrong mass
        assert!(TargetDensity::new(vec![0.0, 2.0], vec![1.0, 1.0], 1.0).is_err());
        // eta reaches the zero at 2
        assert!(TargetDensity::new(vec![0.0, 2.0], vec![1.0, 0.0], 2.0).is_err());
        // vanishes near 0
        assert!(TargetDensity::new(vec![1.0, 2.0], vec![1.0, 1.0], 1.5).is_err());
        // zero at an interior breakpoint inside ]0, eta]
        assert!(TargetDensity::new(vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], 1.5).is_err());
        // negative values
        assert!(TargetDensity::new(vec![0.0, 1.0, 2.0], vec![2.0, -0.5, 1.0], 0.5).is_err());
    }

    #[test]
    fn zero_at_origin_is_allowed() {
        // f(x) = x/2 on [0, 2]
        assert!(TargetDensity::new(vec![0.0, 2.0], vec![0.0, 1.0], 2.0).is_ok());
    }

    #[test]
    fn json_schema() {
        let f: TargetDensity<f64> =
            serde_json::from_str(r#"{"breakpoints": [0, 1], "values": [1, 1], "eta": 1}"#).unwrap();
        assert_eq!(f.eta(), 1.0);
    }
}
