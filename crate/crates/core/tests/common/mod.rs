#![allow(dead_code)]

use feasidist::distributions::{FiniteTarget, TargetDensity};
use feasidist::piecewise::PiecewiseLinear;

/// `f(x) = 1 - x/2` on `[0, 2]`.
pub fn triangle() -> TargetDensity<f64> {
    TargetDensity::new(vec![0.0, 2.0], vec![1.0, 0.0], 1.0).unwrap()
}

/// Rises on `[0, 0.5]`, flat on `[0.5, 1.5]`, falls to zero at `2`.
pub fn trapezoid() -> TargetDensity<f64> {
    let shape = PiecewiseLinear::new(vec![0.0, 0.5, 1.5, 2.0], vec![0.5, 1.0, 1.0, 0.0]).unwrap();
    TargetDensity::normalized(shape, 1.5).unwrap()
}

/// `e^{-x}` interpolated at quarter steps on `[0, 5.75]`, reaching zero at `6`.
pub fn exponential() -> TargetDensity<f64> {
    let mut xs: Vec<f64> = (0..24).map(|i| i as f64 * 0.25).collect();
    let mut ys: Vec<f64> = xs.iter().map(|x| (-x).exp()).collect();
    xs.push(6.0);
    ys.push(0.0);
    TargetDensity::normalized(PiecewiseLinear::new(xs, ys).unwrap(), 5.75).unwrap()
}

pub fn density_fixtures() -> Vec<(&'static str, TargetDensity<f64>)> {
    vec![("triangle", triangle()), ("trapezoid", trapezoid()), ("exponential", exponential())]
}

pub fn finite_fixtures() -> Vec<FiniteTarget<f64>> {
    vec![
        FiniteTarget::dirac_zero(),
        FiniteTarget::new(vec![(0.0, 0.25), (2.0, 0.75)]).unwrap(),
        FiniteTarget::new(vec![(0.0, 0.5), (1.0, 0.3), (3.0, 0.2)]).unwrap(),
        FiniteTarget::new(vec![(0.0, 0.1), (0.5, 0.2), (1.0, 0.3), (4.0, 0.4)]).unwrap(),
        FiniteTarget::new(vec![(0.0, 0.7), (2.0, 0.2), (2.5, 0.05), (3.0, 0.05)]).unwrap(),
    ]
}
