use std::collections::BTreeMap;

use crate::distributions::{DiscreteDistribution, FiniteTarget};
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::split::{solve_weight_split, WeightSplit};
use super::structure::TreeStructure;

/// Default cap on the number of leaves of a materialized tree.
pub const DEFAULT_LEAF_CAP: usize = 1_000_000;

/// Default cap on the number of ordered leaf pairs enumerated by [`exact_two_point`].
pub const DEFAULT_PAIR_CAP: f64 = 1e8;

/// One grafting level: every node at this depth gets `split.j()` children
/// attached by edges of length `edge_length`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level<T: Real> {
    pub split: WeightSplit<T>,
    pub edge_length: T,
}

/// The finite-target construction kept in level form, listed from the root downwards.
///
/// All subtrees at the same depth are copies of each other, so the levels describe the
/// tree completely without allocating its leaves.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredTree<T: Real> {
    levels: Vec<Level<T>>,
}

impl<T: Real> LayeredTree<T> {
    pub fn from_target(target: &FiniteTarget<T>) -> Result<Self> {
        let atoms = target.atoms();
        let mut prefix = Vec::with_capacity(atoms.len());
        let mut acc = T::zero();
        for &(_, p) in atoms {
            acc = acc + p;
            prefix.push(acc);
        }
        // the largest distance is grafted first, at the root
        let mut levels = Vec::with_capacity(target.k());
        for i in (1..atoms.len()).rev() {
            let s = prefix[i - 1] / prefix[i];
            levels.push(Level {
                split: solve_weight_split(s)?,
                edge_length: (atoms[i].0 - atoms[i - 1].0) * T::lit(0.5),
            });
        }
        Ok(Self { levels })
    }

    pub fn from_levels(levels: Vec<Level<T>>) -> Self {
        Self { levels }
    }

    pub fn levels(&self) -> &[Level<T>] {
        &self.levels
    }

    /// `Π j` over levels, as a float (may be infinite).
    pub fn projected_leaf_count(&self) -> f64 {
        self.levels.iter().map(|l| l.split.j() as f64).product()
    }

    /// Common root-to-leaf depth.
    pub fn height(&self) -> T {
        self.levels.iter().map(|l| l.edge_length).sum()
    }

    /// Two-point law of the tree computed from its levels alone.
    ///
    /// Two independent leaves first separate at level `l` with probability
    /// `(Π_{i<l} q_i)(1 - q_l)`, where `q_i = Σ m²` at level `i`.
    pub fn pair_law(&self) -> DiscreteDistribution<T> {
        let n = self.levels.len();
        let mut below = vec![T::zero(); n + 1];
        for i in (0..n).rev() {
            below[i] = below[i + 1] + self.levels[i].edge_length;
        }
        let mut same = T::one();
        let mut atoms = Vec::with_capacity(n + 1);
        for (i, l) in self.levels.iter().enumerate() {
            let q = l.split.sum_of_squares();
            atoms.push((below[i] + below[i], same * (T::one() - q)));
            same = same * q;
        }
        atoms.push((T::zero(), same));
        DiscreteDistribution::from_weighted(atoms)
    }

    /// Allocates the full tree. Nodes are numbered breadth-first from the root.
    pub fn materialize(&self, leaf_cap: usize) -> Result<TreeStructure<T>> {
        let projected = self.projected_leaf_count();
        if projected > leaf_cap as f64 {
            return Err(Error::TooLarge { what: "leaf count", projected, cap: leaf_cap as f64 });
        }
        let mut parent = vec![None];
        let mut edge_length = vec![T::zero()];
        let mut frontier: Vec<(usize, T)> = vec![(0, T::one())];
        for l in &self.levels {
            let mut next = Vec::with_capacity(frontier.len() * l.split.j());
            for &(u, mass) in &frontier {
                for m in l.split.weights() {
                    let v = parent.len();
                    parent.push(Some(u));
                    edge_length.push(l.edge_length);
                    next.push((v, mass * m));
                }
            }
            frontier = next;
        }
        let leaf_mass: BTreeMap<usize, T> = frontier.into_iter().collect();
        TreeStructure::new(parent, edge_length, leaf_mass, 0)
    }
}

/// Builds a finite tree whose two-point distance law is `target`.
pub fn build_finite<T: Real>(target: &FiniteTarget<T>, leaf_cap: usize) -> Result<TreeStructure<T>> {
    LayeredTree::from_target(target)?.materialize(leaf_cap)
}

/// Two-point law by enumerating every ordered pair of charged leaves.
pub fn exact_two_point<T: Real>(t: &TreeStructure<T>, pair_cap: f64) -> Result<DiscreteDistribution<T>> {
    let leaves: Vec<(usize, T)> = t.leaf_mass().iter().map(|(&v, &m)| (v, m)).collect();
    let pairs = (leaves.len() as f64).powi(2);
    if pairs > pair_cap {
        return Err(Error::EnumerationCap { pairs, cap: pair_cap });
    }
    let mut acc: BTreeMap<i64, (T, T)> = BTreeMap::new();
    for &(u, mu) in &leaves {
        for &(v, mv) in &leaves {
            let d = t.distance(u, v);
            let e = acc.entry(crate::scalar::atom_key(d)).or_insert((d, T::zero()));
            e.1 = e.1 + mu * mv;
        }
    }
    Ok(DiscreteDistribution::from_weighted(acc.into_values()))
}

/// The two-point law of `build_finite(target)` obtained by unrolling the grafting
/// recursion, without building anything.
pub fn analytic_two_point<T: Real>(target: &FiniteTarget<T>) -> DiscreteDistribution<T> {
    let atoms = target.atoms();
    let mut out = Vec::with_capacity(atoms.len());
    // scale = mass still carried by the sub-target after peeling off larger atoms
    let mut scale = T::one();
    let mut rest: T = atoms.iter().map(|a| a.1).sum();
    for &(d, p) in atoms.iter().rev() {
        let share = if rest > T::zero() { p / rest } else { T::one() };
        out.push((d, scale * share));
        scale = scale * (T::one() - share);
        rest = rest - p;
    }
    DiscreteDistribution::from_weighted(out)
}
