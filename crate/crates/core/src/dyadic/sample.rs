use crate::distributions::EmpiricalSample;
use crate::rng::SamplerState;
use crate::scalar::Real;

use super::model::DyadicModel;

/// Largest child count drawn as an explicit index; larger levels sample the
/// equivalent categories directly.
const INDEX_DRAW_LIMIT: f64 = 4_294_967_296.0;

/// Uniform child index in `1..=2κ` reduced to (is even); `None` past the index limit.
fn child_parity(kappa: f64, rng: &mut SamplerState) -> Option<bool> {
    let children = 2.0 * kappa;
    (children <= INDEX_DRAW_LIMIT).then(|| (rng.index(children as u64) + 1).is_multiple_of(2))
}

/// One level of two independent rays: `None` if they pick the same child,
/// otherwise the parities of the two distinct children.
fn split_step(kappa: f64, rng: &mut SamplerState) -> Option<(bool, bool)> {
    let children = 2.0 * kappa;
    if children <= INDEX_DRAW_LIMIT {
        let c = children as u64;
        let (i, j) = (rng.index(c) + 1, rng.index(c) + 1);
        return (i != j).then_some((i % 2 == 0, j % 2 == 0));
    }
    if rng.uniform() < 1.0 / children {
        return None;
    }
    // distinct ordered pairs: both odd with prob a, mixed with prob b, both even with prob a
    let r = 1.0 / kappa;
    let a = (1.0 - r) / (2.0 * (2.0 - r));
    let u = rng.uniform();
    Some(if u < a {
        (false, false)
    } else if u < 1.0 - a {
        (true, false)
    } else {
        (true, true)
    })
}

/// Distance from the root to a random boundary point: `Σ_n (1 + 1(I_n even)) 2^{-(n+1)}`,
/// truncated where terms fall below double precision.
pub fn sample_root_distance<T: Real>(model: &DyadicModel<T>, rng: &mut SamplerState) -> T {
    let mut d = 0.0;
    for n in 0..=53i32 {
        let k = model.kappas().kappa(n as usize).to_f64_lossy();
        let even = child_parity(k, rng).unwrap_or_else(|| rng.coin());
        d += (1.0 + f64::from(u8::from(even))) * 2f64.powi(-(n + 1));
    }
    T::lit(d)
}

/// Distance between two independent boundary points.
///
/// Walks down while both rays pick the same child; at the first split level `n`
/// returns `(4 + even_1 + even_2 + U_1 + U_2) 2^{-(n+1)}`.
pub fn sample_pair_distance<T: Real>(model: &DyadicModel<T>, rng: &mut SamplerState) -> T {
    for n in 0..model.depth() {
        let k = model.kappas().kappa(n).to_f64_lossy();
        if let Some((e1, e2)) = split_step(k, rng) {
            let x = 4.0 + f64::from(u8::from(e1)) + f64::from(u8::from(e2)) + rng.uniform() + rng.uniform();
            return T::lit(x * 2f64.powi(-(n as i32 + 1)));
        }
    }
    T::zero()
}

/// Same law as [`sample_pair_distance`] but below the split level each ray keeps
/// drawing children independently instead of using the `1 + U` shortcut.
pub fn sample_pair_distance_series<T: Real>(model: &DyadicModel<T>, rng: &mut SamplerState) -> T {
    for n in 0..model.depth() {
        let k = model.kappas().kappa(n).to_f64_lossy();
        if let Some((e1, e2)) = split_step(k, rng) {
            let scale = 2f64.powi(-(n as i32 + 1));
            let mut d = (2.0 + f64::from(u8::from(e1)) + f64::from(u8::from(e2))) * scale;
            for p in n + 1..n + 56 {
                let kp = model.kappas().kappa(p).to_f64_lossy();
                for _ in 0..2 {
                    let even = child_parity(kp, rng).unwrap_or_else(|| rng.coin());
                    d += (1.0 + f64::from(u8::from(even))) * 2f64.powi(-(p as i32 + 1));
                }
            }
            return T::lit(d);
        }
    }
    T::zero()
}

pub fn sample_pair_distances<T: Real>(model: &DyadicModel<T>, n: usize, rng: &mut SamplerState) -> EmpiricalSample<T> {
    let record = rng.record();
    EmpiricalSample::new((0..n).map(|_| sample_pair_distance(model, rng)).collect(), record)
}

pub fn sample_root_distances<T: Real>(model: &DyadicModel<T>, n: usize, rng: &mut SamplerState) -> EmpiricalSample<T> {
    let record = rng.record();
    EmpiricalSample::new((0..n).map(|_| sample_root_distance(model, rng)).collect(), record)
}
