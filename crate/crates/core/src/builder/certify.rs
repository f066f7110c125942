use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::TargetDensity;
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::density::BuiltDensity;

/// Interior points added to every part of `g` on top of the breakpoints.
pub const DEFAULT_INTERIOR_POINTS: usize = 1000;

const WORST_KEPT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub x: f64,
    pub g: f64,
    pub f: f64,
    pub ratio: f64,
}

/// Outcome of checking `g <= (1 + ζ) f` on the evaluation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub zeta: f64,
    pub bound: f64,
    pub max_ratio: f64,
    pub worst: Vec<RatioPoint>,
    /// Grid points with `f = 0 < g`.
    pub zero_violations: u64,
    pub points_checked: u64,
    pub pass: bool,
}

#[derive(Default)]
struct Tally {
    worst: Vec<RatioPoint>,
    zero_violations: u64,
    points: u64,
}

impl Tally {
    fn push(&mut self, x: f64, g: f64, f: f64) {
        self.points += 1;
        if f > 0.0 {
            let ratio = g / f;
            if self.worst.len() < WORST_KEPT || ratio > self.worst[WORST_KEPT - 1].ratio {
                self.worst.push(RatioPoint { x, g, f, ratio });
                sort_worst(&mut self.worst);
                self.worst.truncate(WORST_KEPT);
            }
        } else if g > 0.0 {
            self.zero_violations += 1;
            // an unbounded ratio always ranks first
            self.worst.insert(0, RatioPoint { x, g, f, ratio: f64::INFINITY });
            self.worst.truncate(WORST_KEPT);
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.worst.extend(other.worst);
        sort_worst(&mut self.worst);
        self.worst.truncate(WORST_KEPT);
        self.zero_violations += other.zero_violations;
        self.points += other.points;
        self
    }
}

fn sort_worst(w: &mut [RatioPoint]) {
    w.sort_by(|a, b| b.ratio.total_cmp(&a.ratio).then(a.x.total_cmp(&b.x)));
}

fn push_uniform<T: Real>(g: &BuiltDensity<T>, f: &TargetDensity<T>, a: T, b: T, count: usize, tally: &mut Tally) {
    for i in 1..=count {
        let x = a + (b - a) * T::from_usize(i).unwrap() / T::from_usize(count + 1).unwrap();
        tally.push(x.to_f64_lossy(), g.eval(x).to_f64_lossy(), f.eval(x).to_f64_lossy());
    }
}

/// Evaluates `g / f` on every breakpoint of `g` and `f` plus `interior` evenly spaced points
/// per part of `g` (the graft part and each interval part).
///
/// Between consecutive breakpoints both are linear, so their ratio is monotone and the
/// breakpoints already carry the maximum; the interior points are a cross-check.
pub fn domination_report<T: Real>(
    g: &BuiltDensity<T>,
    f: &TargetDensity<T>,
    zeta: T,
    interior: usize,
) -> CertificateReport {
    let graft = {
        let mut t = Tally::default();
        let pw = g.graft_breakpoints();
        for &x in pw.iter() {
            t.push(x.to_f64_lossy(), g.eval(x).to_f64_lossy(), f.eval(x).to_f64_lossy());
        }
        push_uniform(g, f, T::zero(), g.graft_end(), interior, &mut t);
        t
    };
    let table = g.table();
    let steps = table.steps();
    let step = g.eps() / T::from_usize(steps).unwrap();
    let parts = g
        .starts()
        .par_iter()
        .zip(g.coefficients().par_iter())
        .map(|(&d, &c)| {
            let mut t = Tally::default();
            let mut cursor = 0;
            for s in 0..=steps {
                let x = d + T::from_usize(s).unwrap() * step;
                let fx = f.shape().eval_seq(x, &mut cursor);
                t.push(x.to_f64_lossy(), (c * table.at(s)).to_f64_lossy(), fx.to_f64_lossy());
            }
            cursor = 0;
            let (eps, count) = (g.eps(), T::from_usize(interior + 1).unwrap());
            for i in 1..=interior {
                let y = T::from_usize(i).unwrap() / count;
                let x = d + eps * y;
                let fx = f.shape().eval_seq(x, &mut cursor);
                t.push(x.to_f64_lossy(), (c * table.eval(y)).to_f64_lossy(), fx.to_f64_lossy());
            }
            t
        })
        .collect::<Vec<_>>();
    let mut tally = parts.into_iter().fold(graft, Tally::merge);
    let mut extra = Tally::default();
    for &x in f.shape().breakpoints() {
        extra.push(x.to_f64_lossy(), g.eval(x).to_f64_lossy(), f.eval(x).to_f64_lossy());
    }
    tally = tally.merge(extra);

    let bound = 1.0 + zeta.to_f64_lossy();
    let max_ratio = tally.worst.first().map_or(0.0, |p| p.ratio);
    CertificateReport {
        zeta: zeta.to_f64_lossy(),
        bound,
        max_ratio,
        worst: tally.worst,
        zero_violations: tally.zero_violations,
        points_checked: tally.points,
        pass: tally.zero_violations == 0 && max_ratio <= bound,
    }
}

/// [`domination_report`] on the standard grid, failing when the bound does not hold.
pub fn certify_domination<T: Real>(g: &BuiltDensity<T>, f: &TargetDensity<T>, zeta: T) -> Result<CertificateReport> {
    let report = domination_report(g, f, zeta, DEFAULT_INTERIOR_POINTS);
    if report.pass {
        return Ok(report);
    }
    let worst = report
        .worst
        .iter()
        .map(|p| format!("x={:.6e} g={:.6e} f={:.6e} ratio={:.6}", p.x, p.g, p.f, p.ratio))
        .collect::<Vec<_>>()
        .join("; ");
    Err(Error::Certification {
        level: 0,
        detail: format!(
            "max ratio {:.6} > {:.6}, {} points with f = 0 < g; worst: {worst}",
            report.max_ratio, report.bound, report.zero_violations
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::{build_density, derive_params};

    fn triangle() -> TargetDensity<f64> {
        TargetDensity::new(vec![0.0, 2.0], vec![1.0, 0.0], 1.0).unwrap()
    }

    #[test]
    fn triangle_passes_at_zeta_one() {
        let f = triangle();
        let (_, g) = build_density(&f, 1.0).unwrap();
        let r = certify_domination(&g, &f, 1.0).unwrap();
        assert!(r.max_ratio <= 2.0);
        assert_eq!(r.zero_violations, 0);
        assert!(r.points_checked > 1000);
    }

    #[test]
    fn graft_part_alone_stays_below_f() {
        let f = triangle();
        let p = derive_params(&f, 0.1, 10).unwrap();
        let g = BuiltDensity::new(&p, &f);
        for &x in g.graft_breakpoints().iter() {
            if x > 0.0 {
                assert!(g.graft_part(x) <= f.eval(x), "x {x}");
            }
        }
    }

    #[test]
    fn inflated_p0_fails() {
        let f = triangle();
        let (_, g) = build_density(&f, 0.5).unwrap();
        let bad = g.with_p0(4.0 * g.p0());
        match certify_domination(&bad, &f, 0.5) {
            Err(Error::Certification { detail, .. }) => assert!(detail.contains("worst")),
            other => panic!("expected failure, got {other:?}"),
        }
    }
}
