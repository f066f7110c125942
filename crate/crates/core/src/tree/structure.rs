use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A finite rooted tree with edge lengths and a probability measure on its leaves.
///
/// `edge_length[v]` is the length of the edge from `v` to its parent (ignored for the root).
/// Leaves missing from `leaf_mass` carry no mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTree<T>", into = "RawTree<T>")]
#[serde(bound = "T: Real")]
pub struct TreeStructure<T: Real> {
    parent: Vec<Option<usize>>,
    edge_length: Vec<T>,
    leaf_mass: BTreeMap<usize, T>,
    root: usize,
    // derived
    children: Vec<Vec<usize>>,
    depth: Vec<T>,
    level: Vec<u32>,
    up: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct RawTree<T: Real> {
    parent: Vec<Option<usize>>,
    edge_length: Vec<T>,
    leaf_mass: BTreeMap<usize, T>,
    root: usize,
}

impl<T: Real> TryFrom<RawTree<T>> for TreeStructure<T> {
    type Error = Error;
    fn try_from(r: RawTree<T>) -> Result<Self> {
        Self::new(r.parent, r.edge_length, r.leaf_mass, r.root)
    }
}

impl<T: Real> From<TreeStructure<T>> for RawTree<T> {
    fn from(t: TreeStructure<T>) -> Self {
        RawTree { parent: t.parent, edge_length: t.edge_length, leaf_mass: t.leaf_mass, root: t.root }
    }
}

impl<T: Real> TreeStructure<T> {
    pub fn new(
        parent: Vec<Option<usize>>,
        mut edge_length: Vec<T>,
        leaf_mass: BTreeMap<usize, T>,
        root: usize,
    ) -> Result<Self> {
        let n = parent.len();
        let bad = |m: String| Err(Error::InvalidTree(m));
        if n == 0 {
            return bad("no nodes".into());
        }
        if edge_length.len() != n {
            return bad(format!("{} edge lengths for {n} nodes", edge_length.len()));
        }
        if root >= n || parent[root].is_some() {
            return bad(format!("root {root} must exist and have no parent"));
        }
        let mut children = vec![Vec::new(); n];
        for (v, p) in parent.iter().enumerate() {
            match *p {
                None if v != root => return bad(format!("node {v} has no parent but is not the root")),
                None => {}
                Some(p) if p >= n || p == v => return bad(format!("node {v} has invalid parent {p}")),
                Some(p) => {
                    let l = edge_length[v];
                    if !(l > T::zero()) || !l.is_finite() {
                        return bad(format!("edge length {l} at node {v} must be positive"));
                    }
                    children[p].push(v);
                }
            }
        }
        edge_length[root] = T::zero();

        // BFS from the root: reaching every node means connected and acyclic
        let mut depth = vec![T::zero(); n];
        let mut level = vec![0u32; n];
        let mut order = Vec::with_capacity(n);
        order.push(root);
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &c in &children[u] {
                depth[c] = depth[u] + edge_length[c];
                level[c] = level[u] + 1;
                order.push(c);
            }
        }
        if order.len() != n {
            return bad(format!("only {} of {n} nodes reachable from the root", order.len()));
        }

        let mut total = T::zero();
        for (&v, &m) in &leaf_mass {
            if v >= n || !children[v].is_empty() {
                return bad(format!("leaf mass on non-leaf node {v}"));
            }
            if !(m > T::zero() && m <= T::one()) {
                return bad(format!("leaf mass {m} at node {v} outside ]0,1]"));
            }
            total = total + m;
        }
        if (total - T::one()).abs() > T::mass_tol() {
            return bad(format!("leaf masses sum to {total}"));
        }

        let max_level = level.iter().copied().max().unwrap_or(0);
        let mut up = vec![parent.iter().enumerate().map(|(v, p)| p.unwrap_or(v)).collect::<Vec<_>>()];
        let mut span = 1u32;
        while span < max_level.max(1) {
            let prev = up.last().unwrap();
            let next = (0..n).map(|v| prev[prev[v]]).collect();
            up.push(next);
            span *= 2;
        }

        Ok(Self { parent, edge_length, leaf_mass, root, children, depth, level, up })
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn edge_length(&self, v: usize) -> T {
        self.edge_length[v]
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        v < self.parent.len() && self.children[v].is_empty()
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.parent.len()).filter(move |&v| self.children[v].is_empty())
    }

    pub fn leaf_mass(&self) -> &BTreeMap<usize, T> {
        &self.leaf_mass
    }

    /// Metric distance from the root.
    pub fn depth(&self, v: usize) -> T {
        self.depth[v]
    }

    pub fn lca(&self, mut u: usize, mut v: usize) -> usize {
        if self.level[u] < self.level[v] {
            std::mem::swap(&mut u, &mut v);
        }
        let mut diff = self.level[u] - self.level[v];
        let mut k = 0;
        while diff > 0 {
            if diff & 1 == 1 {
                u = self.up[k][u];
            }
            diff >>= 1;
            k += 1;
        }
        if u == v {
            return u;
        }
        for k in (0..self.up.len()).rev() {
            if self.up[k][u] != self.up[k][v] {
                u = self.up[k][u];
                v = self.up[k][v];
            }
        }
        self.up[0][u]
    }

    /// Tree distance between any two nodes.
    pub fn distance(&self, u: usize, v: usize) -> T {
        let w = self.lca(u, v);
        self.depth[u] + self.depth[v] - (self.depth[w] + self.depth[w])
    }
}

/// Distance between two leaves.
pub fn pairwise_distance<T: Real>(t: &TreeStructure<T>, u: usize, v: usize) -> Result<T> {
    for x in [u, v] {
        if !t.is_leaf(x) {
            return Err(Error::NotALeaf(x));
        }
    }
    Ok(t.distance(u, v))
}
