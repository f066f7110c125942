use serde::{Deserialize, Serialize};

use crate::distributions::{EmpiricalSample, FiniteTarget, TargetDensity};
use crate::dyadic::{sample_pair_distance, DyadicModel};
use crate::error::{Error, Result};
use crate::rng::SamplerState;
use crate::scalar::Real;
use crate::tree::{solve_weight_split, LayeredTree, LeafSampler, TreeStructure};

use super::params::BuildParams;

/// The discretized target `p0 δ_0 + Σ_i m_i (1/#J) Σ_j δ_{d_i + j ε/n²}`, kept symbolically.
///
/// Atom `0` is the origin; atom `1 + i #J + j` is `d_i + j ε/n²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DiscretizedTarget<T: Real> {
    pub p0: T,
    pub starts: Vec<T>,
    pub masses: Vec<T>,
    pub spacing: T,
    pub j_count: usize,
}

impl<T: Real> DiscretizedTarget<T> {
    pub fn new(params: &BuildParams<T>, f: &TargetDensity<T>) -> Self {
        let n = T::from_usize(params.n).unwrap();
        Self {
            p0: params.p0,
            starts: params.ds.clone(),
            masses: params.interval_masses(f),
            spacing: params.eps / (n * n),
            j_count: params.j_count,
        }
    }

    pub fn atom_count(&self) -> u64 {
        1 + self.starts.len() as u64 * self.j_count as u64
    }

    pub fn atom(&self, idx: u64) -> (T, T) {
        if idx == 0 {
            return (T::zero(), self.p0);
        }
        let jc = self.j_count as u64;
        let (i, j) = (((idx - 1) / jc) as usize, (idx - 1) % jc);
        let jc_t = T::from_usize(self.j_count).unwrap();
        (self.starts[i] + T::from_u64(j).unwrap() * self.spacing, self.masses[i] / jc_t)
    }

    pub fn atoms(&self) -> impl Iterator<Item = (T, T)> + '_ {
        (0..self.atom_count()).map(move |i| self.atom(i))
    }

    pub fn total_mass(&self) -> T {
        self.p0 + self.masses.iter().copied().sum::<T>()
    }

    /// Materializes the target when it has at most `cap` atoms.
    pub fn to_finite(&self, cap: u64) -> Result<FiniteTarget<T>> {
        let count = self.atom_count();
        if count > cap {
            return Err(Error::TooLarge { what: "atom count", projected: count as f64, cap: cap as f64 });
        }
        FiniteTarget::new(self.atoms().collect())
    }

    /// `log2` of the leaf count of the tree built from this target, streamed over atoms.
    pub fn skeleton_log2_leaves(&self) -> Result<f64> {
        let mut below = self.p0;
        let mut acc = 0.0;
        for (_, m) in self.atoms().skip(1) {
            let total = below + m;
            acc += (solve_weight_split(below / total)?.j() as f64).log2();
            below = total;
        }
        Ok(acc)
    }
}

/// The finite skeleton carrying the grafts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", bound = "T: Real")]
pub enum Skeleton<T: Real> {
    /// Fully allocated tree.
    Explicit { tree: TreeStructure<T> },
    /// Too large to allocate; its pair-distance law is the discretized target itself.
    Symbolic { log2_leaves: f64 },
}

/// A finite skeleton with a scaled copy of the dyadic tree grafted at every leaf.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "RawComposite<T>", into = "RawComposite<T>")]
#[serde(bound = "T: Real")]
pub struct CompositeSpace<T: Real> {
    pub skeleton: Skeleton<T>,
    pub scale: T,
    pub graft: DyadicModel<T>,
    pub target: DiscretizedTarget<T>,
    // prefix of interval masses, for the symbolic sampler
    cum: Vec<f64>,
    leaves: Option<LeafSampler>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct RawComposite<T: Real> {
    skeleton: Skeleton<T>,
    scale: T,
    graft: DyadicModel<T>,
    target: DiscretizedTarget<T>,
}

impl<T: Real> From<RawComposite<T>> for CompositeSpace<T> {
    fn from(raw: RawComposite<T>) -> Self {
        CompositeSpace::assemble(raw.skeleton, raw.scale, raw.graft, raw.target)
    }
}

impl<T: Real> From<CompositeSpace<T>> for RawComposite<T> {
    fn from(c: CompositeSpace<T>) -> Self {
        RawComposite { skeleton: c.skeleton, scale: c.scale, graft: c.graft, target: c.target }
    }
}

impl<T: Real> CompositeSpace<T> {
    pub fn assemble(skeleton: Skeleton<T>, scale: T, graft: DyadicModel<T>, target: DiscretizedTarget<T>) -> Self {
        let mut acc = 0.0;
        let cum = target
            .masses
            .iter()
            .map(|m| {
                acc += m.to_f64_lossy();
                acc
            })
            .collect();
        let leaves = match &skeleton {
            Skeleton::Explicit { tree } => Some(LeafSampler::new(tree)),
            Skeleton::Symbolic { .. } => None,
        };
        Self { skeleton, scale, graft, target, cum, leaves }
    }

    /// One draw of the distance between two independent points.
    ///
    /// Same leaf: a scaled pair distance inside one graft. Different leaves: the skeleton
    /// distance plus `(ε/n)(2 + U_1 + U_2)` for the two climbs to the graft roots.
    pub fn draw(&self, rng: &mut SamplerState) -> T {
        let scale = self.scale.to_f64_lossy();
        let climb = |rng: &mut SamplerState| scale * (2.0 + rng.uniform() + rng.uniform());
        match (&self.skeleton, &self.leaves) {
            (Skeleton::Explicit { tree }, Some(leaves)) => {
                let (u, v) = (leaves.draw(rng), leaves.draw(rng));
                if u == v {
                    self.scale * sample_pair_distance(&self.graft, rng)
                } else {
                    tree.distance(u, v) + T::lit(climb(rng))
                }
            }
            _ => {
                // a leaf pair at skeleton distance `x` has the law of an atom `x` of the target
                let p0 = self.target.p0.to_f64_lossy();
                let total = p0 + self.cum.last().copied().unwrap_or(0.0);
                let u = rng.uniform() * total;
                if u < p0 {
                    return self.scale * sample_pair_distance(&self.graft, rng);
                }
                let i = self.cum.partition_point(|&c| c <= u - p0).min(self.cum.len() - 1);
                let j = rng.index(self.target.j_count as u64) as f64;
                let base = self.target.starts[i].to_f64_lossy() + j * self.target.spacing.to_f64_lossy();
                T::lit(base + climb(rng))
            }
        }
    }
}

fn assemble<T: Real>(
    skeleton: Skeleton<T>,
    params: &BuildParams<T>,
    target: DiscretizedTarget<T>,
) -> CompositeSpace<T> {
    CompositeSpace::assemble(skeleton, params.scale(), DyadicModel::new(params.kappas.clone()), target)
}

/// Allocates the skeleton tree; fails when it exceeds `leaf_cap`.
pub fn build_composite_explicit<T: Real>(
    params: &BuildParams<T>,
    f: &TargetDensity<T>,
    leaf_cap: usize,
) -> Result<CompositeSpace<T>> {
    let target = DiscretizedTarget::new(params, f);
    // every level has at least two children
    let min_log2 = (target.atom_count() - 1) as f64;
    if min_log2 > (leaf_cap as f64).log2() {
        return Err(Error::TooLarge {
            what: "skeleton leaf count",
            projected: 2f64.powf(min_log2),
            cap: leaf_cap as f64,
        });
    }
    let finite = target.to_finite(u64::MAX)?;
    let tree = LayeredTree::from_target(&finite)?.materialize(leaf_cap)?;
    Ok(assemble(Skeleton::Explicit { tree }, params, target))
}

/// Allocates the skeleton when it fits under `leaf_cap`, otherwise keeps it symbolic.
pub fn build_composite<T: Real>(
    params: &BuildParams<T>,
    f: &TargetDensity<T>,
    leaf_cap: usize,
) -> Result<CompositeSpace<T>> {
    match build_composite_explicit(params, f, leaf_cap) {
        Ok(space) => Ok(space),
        Err(Error::TooLarge { .. }) => {
            let target = DiscretizedTarget::new(params, f);
            let log2_leaves =
                if target.atom_count() <= 10_000_000 { target.skeleton_log2_leaves()? } else { f64::INFINITY };
            Ok(assemble(Skeleton::Symbolic { log2_leaves }, params, target))
        }
        Err(e) => Err(e),
    }
}

/// `m` draws of [`CompositeSpace::draw`], run in parallel chunks.
pub fn sample_composite<T: Real>(space: &CompositeSpace<T>, m: usize, rng: &SamplerState) -> EmpiricalSample<T> {
    EmpiricalSample::new(rng.chunked(m, |r| space.draw(r)), rng.record())
}
