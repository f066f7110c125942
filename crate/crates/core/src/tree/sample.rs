use crate::distributions::EmpiricalSample;
use crate::rng::SamplerState;
use crate::scalar::Real;

use super::structure::TreeStructure;

/// Inverse-CDF sampler over the charged leaves of a tree.
#[derive(Debug, Clone)]
pub struct LeafSampler {
    leaves: Vec<usize>,
    cum: Vec<f64>,
}

impl LeafSampler {
    pub fn new<T: Real>(t: &TreeStructure<T>) -> Self {
        let mut acc = 0.0;
        let (leaves, cum) = t
            .leaf_mass()
            .iter()
            .map(|(&v, &m)| {
                acc += m.to_f64_lossy();
                (v, acc)
            })
            .unzip();
        Self { leaves, cum }
    }

    pub fn draw(&self, rng: &mut SamplerState) -> usize {
        let u = rng.uniform() * self.cum.last().copied().unwrap_or(1.0);
        let i = self.cum.partition_point(|&c| c <= u);
        self.leaves[i.min(self.leaves.len() - 1)]
    }
}

/// `n` independent draws of the distance between two independent leaves.
pub fn sample_two_point<T: Real>(t: &TreeStructure<T>, n: usize, rng: &mut SamplerState) -> EmpiricalSample<T> {
    let record = rng.record();
    let s = LeafSampler::new(t);
    let values = (0..n)
        .map(|_| {
            let u = s.draw(rng);
            let v = s.draw(rng);
            t.distance(u, v)
        })
        .collect();
    EmpiricalSample::new(values, record)
}

/// Distance matrix of `n` independent leaves.
pub fn sample_npoint_matrix<T: Real>(t: &TreeStructure<T>, n: usize, rng: &mut SamplerState) -> Vec<Vec<T>> {
    let s = LeafSampler::new(t);
    let pts: Vec<usize> = (0..n).map(|_| s.draw(rng)).collect();
    pts.iter().map(|&u| pts.iter().map(|&v| t.distance(u, v)).collect()).collect()
}
