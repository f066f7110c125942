//! Necessary conditions, known infeasible families and covering-number bounds.

use std::collections::VecDeque;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::piecewise::PiecewiseLinear;
use crate::scalar::Real;
use crate::tree::{exact_two_point, TreeStructure, DEFAULT_PAIR_CAP};

/// A distance law with an atomic part and a piecewise-linear continuous part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec<T>", into = "RawSpec<T>")]
#[serde(bound = "T: Real")]
pub struct TargetSpec<T: Real> {
    atoms: Vec<(T, T)>,
    continuous: Option<PiecewiseLinear<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct RawSpec<T: Real> {
    #[serde(default)]
    atoms: Vec<(T, T)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    continuous: Option<PiecewiseLinear<T>>,
}

impl<T: Real> TryFrom<RawSpec<T>> for TargetSpec<T> {
    type Error = Error;
    fn try_from(raw: RawSpec<T>) -> Result<Self> {
        Self::new(raw.atoms, raw.continuous)
    }
}

impl<T: Real> From<TargetSpec<T>> for RawSpec<T> {
    fn from(s: TargetSpec<T>) -> Self {
        RawSpec { atoms: s.atoms, continuous: s.continuous }
    }
}

impl<T: Real> TargetSpec<T> {
    pub fn new(atoms: Vec<(T, T)>, continuous: Option<PiecewiseLinear<T>>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidTarget(m));
        if atoms.iter().any(|&(x, p)| !(x >= T::zero()) || !x.is_finite() || !(p > T::zero())) {
            return bad("atoms need finite locations >= 0 and positive masses".into());
        }
        if atoms.windows(2).any(|w| w[1].0 <= w[0].0) {
            return bad("atom locations not strictly increasing".into());
        }
        if let Some(c) = &continuous {
            if c.values().iter().any(|&v| v < T::zero()) {
                return bad("negative continuous density".into());
            }
        }
        let total = atoms.iter().map(|a| a.1).sum::<T>() + continuous.as_ref().map_or(T::zero(), |c| c.integral());
        if (total - T::one()).abs() > T::mass_tol() {
            return bad(format!("total mass {total}, not 1"));
        }
        Ok(Self { atoms, continuous })
    }

    pub fn atoms(&self) -> &[(T, T)] {
        &self.atoms
    }

    pub fn continuous(&self) -> Option<&PiecewiseLinear<T>> {
        self.continuous.as_ref().filter(|c| c.integral() > T::zero())
    }

    fn atom_at_zero(&self) -> Option<T> {
        self.atoms.first().filter(|a| a.0 == T::zero()).map(|a| a.1)
    }

    /// Largest `η` with the continuous part positive on `]0, η]`, if any.
    pub fn positivity_radius(&self) -> Option<T> {
        let c = self.continuous()?;
        let (xs, ys) = (c.breakpoints(), c.values());
        if xs[0] > T::zero() {
            return None;
        }
        let mut i = 1;
        if !(ys[1] > T::zero()) {
            // positive only on ]0, x_1[ when ys[0] > 0
            return (ys[0] > T::zero()).then(|| xs[1] * T::lit(0.5));
        }
        while i + 1 < xs.len() && ys[i + 1] > T::zero() {
            i += 1;
        }
        Some(xs[i])
    }

    /// The continuous part vanishes on some `[0, δ]`.
    fn continuous_avoids_zero(&self) -> bool {
        match self.continuous() {
            None => true,
            Some(c) => c.start() > T::zero() || (c.values()[0] == T::zero() && c.values()[1] == T::zero()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    InfeasibleNoZeroSupport,
    /// A mass at 0 plus a non-atomic law whose support avoids 0.
    InfeasibleProp3,
    FeasibleByThm1,
    /// Achieved by a random compact space.
    FeasibleByCor1,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::InfeasibleNoZeroSupport => "infeasible-no-zero-support",
            Verdict::InfeasibleProp3 => "infeasible-prop3",
            Verdict::FeasibleByThm1 => "feasible-by-thm1",
            Verdict::FeasibleByCor1 => "feasible-by-cor1",
            Verdict::Unknown => "unknown",
        })
    }
}

pub fn classify<T: Real>(spec: &TargetSpec<T>) -> Verdict {
    let p0 = spec.atom_at_zero();
    let avoids = spec.continuous_avoids_zero();
    if p0.is_none() && avoids {
        return Verdict::InfeasibleNoZeroSupport;
    }
    let continuous = spec.continuous();
    match (p0, spec.atoms.len(), continuous) {
        (Some(p), 1, Some(_)) if p < T::one() && avoids => Verdict::InfeasibleProp3,
        // the single-point space covers δ_0
        (Some(_), _, None) => Verdict::FeasibleByThm1,
        (None, 0, Some(c)) => {
            let continuous_at_end = c.values()[c.len() - 1] == T::zero();
            if spec.positivity_radius().is_some() && continuous_at_end {
                Verdict::FeasibleByCor1
            } else {
                Verdict::Unknown
            }
        }
        _ => Verdict::Unknown,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoveringReport {
    pub eps: f64,
    /// Centers used by the greedy `ε/2`-net; an upper bound on the covering number.
    pub m_greedy: usize,
    pub p_d_le_eps: f64,
    pub verdict: bool,
}

/// Greedy `r`-net over all vertices: visits vertices by descending leaf mass (ties by
/// index) and opens a center at each one still uncovered.
pub fn greedy_net<T: Real>(t: &TreeStructure<T>, radius: T) -> Vec<usize> {
    let n = t.node_count();
    let mass = |v: usize| t.leaf_mass().get(&v).copied().unwrap_or(T::zero());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| mass(b).partial_cmp(&mass(a)).unwrap().then(a.cmp(&b)));
    let mut covered = vec![false; n];
    let mut centers = Vec::new();
    let mut dist = vec![T::zero(); n];
    let mut seen = vec![usize::MAX; n];
    for &c in &order {
        if covered[c] {
            continue;
        }
        let id = centers.len();
        centers.push(c);
        let mut queue = VecDeque::from([c]);
        seen[c] = id;
        dist[c] = T::zero();
        while let Some(v) = queue.pop_front() {
            covered[v] = true;
            let up = t.parent(v).map(|p| (p, t.edge_length(v)));
            let down = t.children(v).iter().map(|&w| (w, t.edge_length(w)));
            for (w, len) in up.into_iter().chain(down) {
                let d = dist[v] + len;
                if seen[w] != id && d <= radius {
                    seen[w] = id;
                    dist[w] = d;
                    queue.push_back(w);
                }
            }
        }
    }
    centers
}

fn mass_within<T: Real>(law: &DiscreteDistribution<T>, eps: T) -> T {
    // atoms within the atom tolerance of eps count as <= eps
    law.atoms().iter().filter(|a| a.0 <= eps + T::atom_tol()).map(|a| a.1).sum()
}

fn report<T: Real>(t: &TreeStructure<T>, law: &DiscreteDistribution<T>, eps: T) -> CoveringReport {
    let m = greedy_net(t, eps * T::lit(0.5)).len();
    let p = mass_within(law, eps).to_f64_lossy();
    CoveringReport { eps: eps.to_f64_lossy(), m_greedy: m, p_d_le_eps: p, verdict: p >= 1.0 / m as f64 }
}

/// Checks `P(D <= ε) >= 1 / M_greedy(ε/2)` with the exact two-point law.
pub fn covering_bound_check<T: Real>(t: &TreeStructure<T>, eps: T) -> Result<CoveringReport> {
    if !(eps > T::zero()) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
    }
    let law = exact_two_point(t, DEFAULT_PAIR_CAP)?;
    Ok(report(t, &law, eps))
}

/// [`covering_bound_check`] over a grid of radii, enumerating the two-point law once.
///
/// First-fit greedy nets are not monotone in the radius, so each `m_greedy` is the
/// smallest net found at any grid radius up to its own: a net of a smaller radius also
/// covers at the larger one.
pub fn covering_sweep<T: Real>(t: &TreeStructure<T>, eps_grid: &[T]) -> Result<Vec<CoveringReport>> {
    if let Some(e) = eps_grid.iter().find(|e| !(**e > T::zero())) {
        return Err(Error::InvalidParameter(format!("eps = {e} must be positive")));
    }
    let law = exact_two_point(t, DEFAULT_PAIR_CAP)?;
    let mut reports: Vec<CoveringReport> = eps_grid.par_iter().map(|&e| report(t, &law, e)).collect();
    let mut order: Vec<usize> = (0..reports.len()).collect();
    order.sort_by(|&a, &b| reports[a].eps.total_cmp(&reports[b].eps));
    let mut best = usize::MAX;
    for i in order {
        let r = &mut reports[i];
        best = best.min(r.m_greedy);
        r.m_greedy = best;
        r.verdict = r.p_d_le_eps >= 1.0 / best as f64;
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::FiniteTarget;
    use crate::tree::build_finite;

    fn spec(atoms: Vec<(f64, f64)>, c: Option<(Vec<f64>, Vec<f64>)>) -> TargetSpec<f64> {
        TargetSpec::new(atoms, c.map(|(x, y)| PiecewiseLinear::new(x, y).unwrap())).unwrap()
    }

    #[test]
    fn labelled_examples() {
        let prop3 = spec(vec![(0.0, 0.5)], Some((vec![1.0, 2.0], vec![0.5, 0.5])));
        assert_eq!(classify(&prop3), Verdict::InfeasibleProp3);
        assert_eq!(classify(&spec(vec![(1.0, 1.0)], None)), Verdict::InfeasibleNoZeroSupport);
        assert_eq!(classify(&spec(vec![(0.0, 0.25), (2.0, 0.75)], None)), Verdict::FeasibleByThm1);
        let tri = Some((vec![0.0, 2.0], vec![1.0, 0.0]));
        assert_eq!(classify(&spec(vec![], tri)), Verdict::FeasibleByCor1);
    }

    #[test]
    fn mixed_and_edge_cases() {
        let zero_tail = spec(vec![(0.0, 0.5)], Some((vec![0.0, 2.0], vec![0.5, 0.0])));
        assert_eq!(classify(&zero_tail), Verdict::Unknown);
        // flat start then a jump at the end: not continuous
        let jump = spec(vec![], Some((vec![0.0, 1.0], vec![1.0, 1.0])));
        assert_eq!(classify(&jump), Verdict::Unknown);
        let late = spec(vec![], Some((vec![0.0, 1.0, 2.0], vec![0.0, 0.0, 2.0])));
        assert_eq!(late.positivity_radius(), None);
        assert_eq!(classify(&late), Verdict::InfeasibleNoZeroSupport);
        assert_eq!(classify(&spec(vec![(0.0, 1.0)], None)), Verdict::FeasibleByThm1);
        assert!(TargetSpec::<f64>::new(vec![(0.0, 0.5)], None).is_err());
    }

    #[test]
    fn positivity_radius_from_segments() {
        let s = spec(vec![], Some((vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 0.5, 0.5, 0.0])));
        assert_eq!(s.positivity_radius(), Some(2.0));
    }

    #[test]
    fn single_node_tree() {
        let t = build_finite(&FiniteTarget::<f64>::dirac_zero(), 10).unwrap();
        let r = covering_bound_check(&t, 0.3).unwrap();
        assert_eq!((r.m_greedy, r.p_d_le_eps, r.verdict), (1, 1.0, true));
    }

    #[test]
    fn two_leaves_at_distance_two() {
        let t = build_finite(&FiniteTarget::new(vec![(0.0, 0.5), (2.0, 0.5)]).unwrap(), 10).unwrap();
        let r = covering_bound_check(&t, 1.0).unwrap();
        assert_eq!(r.p_d_le_eps, 0.5);
        assert!(r.m_greedy == 2 || r.m_greedy == 3, "{}", r.m_greedy);
        assert!(r.verdict);
    }
}
