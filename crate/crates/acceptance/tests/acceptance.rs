//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use feasidist::builder::{
    build_composite, build_density, domination_report, kernel_sum, sample_composite, KernelSumTable,
    DEFAULT_INTERIOR_POINTS,
};
use feasidist::distributions::{ks_statistic, total_variation_atoms, FiniteTarget, FnCdf};
use feasidist::dyadic::{
    psi_cdf, sample_pair_distances, sample_root_distances, select_kappa_density, select_kappa_envelope, DyadicModel,
    EnvelopeFunction, KappaSequence,
};
use feasidist::feasibility::{classify, covering_sweep, TargetSpec};
use feasidist::io::read_json;
use feasidist::mixture::{annealed_sample, decompose};
use feasidist::tree::{build_finite, exact_two_point, solve_weight_split, TreeStructure, DEFAULT_PAIR_CAP};
use feasidist::SamplerState;

/// Leaf cap for randomized finite targets: exact enumeration stays under 10^8 pairs.
const RANDOM_LEAF_CAP: usize = 10_000;
const KS_BOUND: f64 = 0.0025;
const MILLION: usize = 1_000_000;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// Random targets with 1..=4 positive distances whose trees fit under the leaf cap.
fn random_targets(count: usize) -> Vec<(FiniteTarget<f64>, TreeStructure<f64>)> {
    let mut rng = SamplerState::new(feasidist::DEFAULT_SEED, 1);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let k = 1 + rng.index(4) as usize;
        let w: Vec<f64> = (0..=k).map(|_| 0.02 + rng.uniform()).collect();
        let total: f64 = w.iter().sum();
        let mut d = 0.0;
        let mut atoms = vec![(0.0, w[0] / total)];
        for &wi in &w[1..] {
            d += 0.1 + 2.0 * rng.uniform();
            atoms.push((d, wi / total));
        }
        let theta = FiniteTarget::new(atoms).unwrap();
        if let Ok(t) = build_finite(&theta, RANDOM_LEAF_CAP) {
            out.push((theta, t));
        }
    }
    out
}

fn tree_fixtures() -> Vec<(FiniteTarget<f64>, TreeStructure<f64>)> {
    common::finite_fixtures()
        .into_iter()
        .map(|theta| {
            let t = build_finite(&theta, RANDOM_LEAF_CAP).unwrap();
            (theta, t)
        })
        .collect()
}

fn finite_realization(random: &[(FiniteTarget<f64>, TreeStructure<f64>)], build_time: Duration) -> Outcome {
    let started = Instant::now();
    let mut worst = 0.0f64;
    for (theta, t) in random {
        let law = exact_two_point(t, DEFAULT_PAIR_CAP).map_err(|e| e.to_string())?;
        worst = worst.max(total_variation_atoms(&law, &theta.to_discrete()));
    }
    let total = build_time + started.elapsed();
    if total > Duration::from_secs(60) {
        return Err(format!("builds and enumeration took {total:.1?} > 60s"));
    }
    check(worst <= 1e-9, format!("{} targets, max TV {worst:.2e}, {total:.1?}", random.len()))
}

fn leaf_depths(trees: &[(FiniteTarget<f64>, TreeStructure<f64>)]) -> Outcome {
    let mut worst = 0.0f64;
    let mut leaves = 0;
    for (theta, t) in trees {
        let h = theta.max_distance() / 2.0;
        for l in t.leaves() {
            worst = worst.max((t.depth(l) - h).abs());
            leaves += 1;
        }
    }
    check(worst <= 1e-12, format!("{} trees, {leaves} leaves, max depth error {worst:.2e}", trees.len()))
}

fn weight_split() -> Outcome {
    let mut rng = SamplerState::new(feasidist::DEFAULT_SEED, 3);
    let (mut sum_err, mut sq_err) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let s = loop {
            let u = rng.uniform();
            if u > 0.0 {
                break u;
            }
        };
        let q = solve_weight_split(s).map_err(|e| format!("s = {s}: {e}"))?;
        sum_err = sum_err.max((q.sum() - 1.0).abs());
        sq_err = sq_err.max((q.sum_of_squares() - s).abs());
    }
    check(
        sum_err <= 1e-12 && sq_err <= 1e-12,
        format!("10^4 draws, max |sum - 1| {sum_err:.2e}, max |sum sq - s| {sq_err:.2e}"),
    )
}

fn dyadic_sampling() -> Outcome {
    let unit = FnCdf(|x: f64| (x - 1.0).clamp(0.0, 1.0));
    let mut parts = Vec::new();
    let mut ok = true;
    for c in [1.0, 3.0] {
        let model = DyadicModel::new(KappaSequence::constant(c).unwrap());
        let started = Instant::now();
        let pairs = sample_pair_distances(&model, MILLION, &mut SamplerState::default());
        let ks_pair = ks_statistic(&pairs, &FnCdf(|x: f64| psi_cdf(&model, x)));
        let t_pair = started.elapsed();
        let started = Instant::now();
        let roots = sample_root_distances(&model, MILLION, &mut SamplerState::default());
        let ks_root = ks_statistic(&roots, &unit);
        let t_root = started.elapsed();
        ok &= ks_pair <= KS_BOUND && ks_root <= KS_BOUND;
        ok &= t_pair <= Duration::from_secs(30) && t_root <= Duration::from_secs(30);
        parts.push(format!("kappa={c}: pair KS {ks_pair:.5} ({t_pair:.1?}), root KS {ks_root:.5} ({t_root:.1?})"));
    }
    check(ok, parts.join("; "))
}

fn envelope_rule() -> Outcome {
    let mut violations = 0;
    let mut parts = Vec::new();
    for power in [1.0, 2.0] {
        let env = EnvelopeFunction::power(power).unwrap();
        let model = DyadicModel::new(select_kappa_envelope(&env).map_err(|e| e.to_string())?);
        let bad = (1..=1000).map(|i| 2.0 * i as f64 / 1000.0).filter(|&x| psi_cdf(&model, x) > env.eval(x)).count();
        violations += bad;
        parts.push(format!("min(1, x^{power}): {bad} violations"));
    }
    check(violations == 0, parts.join(", "))
}

fn kappa_fixtures() -> Vec<(String, KappaSequence<f64>)> {
    let mut out = vec![
        ("constant 1".to_string(), KappaSequence::constant(1.0).unwrap()),
        ("constant 3".to_string(), KappaSequence::constant(3.0).unwrap()),
        ("explicit 1,2,5".to_string(), KappaSequence::explicit(vec![1.0, 2.0, 5.0]).unwrap()),
    ];
    for p in [1.0, 2.0] {
        out.push((format!("envelope x^{p}"), select_kappa_envelope(&EnvelopeFunction::power(p).unwrap()).unwrap()));
    }
    for (name, f) in common::density_fixtures() {
        out.push((format!("density {name}"), select_kappa_density(&f).unwrap()));
    }
    out
}

fn telescoping() -> Outcome {
    let fixtures = kappa_fixtures();
    let mut worst = 0.0f64;
    for (_, k) in &fixtures {
        let m = DyadicModel::new(k.clone());
        for n in 0..=40 {
            let s: f64 = (0..n).map(|i| m.weight(i)).sum();
            worst = worst.max((s + m.tail(n) - 1.0).abs());
        }
    }
    check(worst <= 1e-12, format!("{} sequences, N <= 40, max error {worst:.2e}", fixtures.len()))
}

fn density_end_to_end() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, f) in common::density_fixtures() {
        let started = Instant::now();
        let mut line = Vec::new();
        for zeta in [1.0, 0.5, 0.2] {
            let (params, g) = build_density(&f, zeta).map_err(|e| format!("{name} zeta {zeta}: {e}"))?;
            let integral = g.integral();
            let cert = domination_report(&g, &f, zeta, DEFAULT_INTERIOR_POINTS);
            let space = build_composite(&params, &f, feasidist::tree::DEFAULT_LEAF_CAP).map_err(|e| e.to_string())?;
            let sample = sample_composite(&space, MILLION, &SamplerState::default());
            let ks = ks_statistic(&sample, &g);
            ok &= (integral - 1.0).abs() <= 1e-9 && cert.pass && cert.max_ratio <= 1.0 + zeta && ks <= KS_BOUND;
            line.push(format!("z={zeta} int-1 {:.1e} ratio {:.4} KS {ks:.5}", integral - 1.0, cert.max_ratio));
        }
        let t = started.elapsed();
        ok &= t <= Duration::from_secs(300);
        parts.push(format!("{name} [{}] {t:.1?}", line.join(", ")));
    }
    check(ok, parts.join("; "))
}

fn kernel_sum_bound() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [4usize, 10, 25] {
        let bound = n as f64 + 3.0;
        let grid = (0..10_000).map(|i| kernel_sum(n, i as f64 / 9_999.0)).fold(0.0f64, f64::max);
        // the tabulated sum is exact between breakpoints, so its max is the true maximum
        let exact = KernelSumTable::<f64>::new(n).max();
        ok &= grid <= bound && exact <= bound;
        parts.push(format!("n={n}: grid max {grid:.4}, exact max {exact:.4}, bound {bound}"));
    }
    check(ok, parts.join("; "))
}

fn decomposition() -> Outcome {
    let f = common::triangle();
    let levels = 10;
    let m = decompose(&f, levels).map_err(|e| format!("{levels} levels on the triangle: {e}"))?;
    let grid: Vec<f64> = (0..=4000).map(|i| i as f64 / 2000.0).collect();
    let err = m.reconstruction_error(&grid);
    let (s, _) = annealed_sample(&m, MILLION, &SamplerState::default());
    let ks = ks_statistic(&s, &f);
    let ks_bound = 0.003 + 2f64.powi(-(levels as i32));
    check(
        err <= 1e-8 && ks <= ks_bound,
        format!("reconstruction error {err:.2e}, annealed KS {ks:.5} (bound {ks_bound:.5})"),
    )
}

fn covering(trees: &[(FiniteTarget<f64>, TreeStructure<f64>)]) -> Outcome {
    let mut failures = 0;
    let mut points = 0;
    for (theta, t) in trees {
        let top = if theta.max_distance() > 0.0 { theta.max_distance() } else { 1.0 };
        let grid: Vec<f64> = (1..=50).map(|i| top * i as f64 / 50.0).collect();
        let reports = covering_sweep(t, &grid).map_err(|e| e.to_string())?;
        points += reports.len();
        failures += reports.iter().filter(|r| !r.verdict).count();
    }
    check(failures == 0, format!("{} trees, {points} radii, {failures} failures", trees.len()))
}

fn classifier() -> Outcome {
    let dir = fixtures_dir().join("classify");
    let labels: serde_json::Value = read_json(&dir.join("labels.json")).map_err(|e| e.to_string())?;
    let cases = labels.as_array().ok_or("labels.json is not a list")?;
    let mut wrong = Vec::new();
    for case in cases {
        let file = case["file"].as_str().ok_or("missing file")?;
        let spec: TargetSpec<f64> = read_json(&dir.join(file)).map_err(|e| e.to_string())?;
        let got = classify(&spec).to_string();
        if got != case["label"] {
            wrong.push(format!("{file}: {got} != {}", case["label"]));
        }
    }
    check(
        wrong.is_empty() && cases.len() == 6,
        if wrong.is_empty() { format!("{}/{} labeled cases", cases.len(), cases.len()) } else { wrong.join("; ") },
    )
}

/// The commands of a full pipeline run, writing into `dir`.
fn pipeline(dir: &Path) -> Vec<Vec<String>> {
    let fx = fixtures_dir();
    let f = |n: &str| fx.join(n).display().to_string();
    let o = |n: &str| dir.join(n).display().to_string();
    let mut cmds: Vec<Vec<String>> = vec![
        vec!["build-finite", "--target", &f("finite_four.json"), "--out", &o("tree.json")],
        vec![
            "verify-tree",
            "--tree",
            &o("tree.json"),
            "--target",
            &f("finite_four.json"),
            "--out",
            &o("verify_exact.json"),
        ],
        vec![
            "verify-tree",
            "--tree",
            &o("tree.json"),
            "--target",
            &f("finite_four.json"),
            "--mode",
            "sample",
            "--samples",
            "200000",
            "--out",
            &o("verify_sample.json"),
        ],
        vec![
            "dyadic",
            "--kappa",
            "1",
            "--emit-cdf",
            &o("psi_cdf.csv"),
            "--emit-density",
            &o("psi.csv"),
            "--samples",
            "200000",
            "--emit-samples",
            &o("pairs.csv"),
            "--out",
            &o("model.json"),
        ],
        vec![
            "dyadic",
            "--envelope",
            &f("envelope_linear.json"),
            "--samples",
            "50000",
            "--root",
            "--emit-samples",
            &o("roots.csv"),
        ],
        vec![
            "build-density",
            "--f",
            &f("triangle_density.json"),
            "--zeta",
            "1",
            "--certify",
            "--samples",
            "200000",
            "--emit-samples",
            &o("composite.csv"),
            "--emit-g",
            &o("g.csv"),
            "--out",
            &o("space.json"),
        ],
        vec!["decompose", "--f", &f("triangle_density.json"), "--levels", "1", "--out", &o("mixture.json")],
        vec![
            "annealed-sample",
            "--mixture",
            &o("mixture.json"),
            "--samples",
            "200000",
            "--emit",
            &o("hist.csv"),
            "--out",
            &o("annealed.json"),
        ],
        vec!["covering", "--tree", &o("tree.json"), "--eps-grid", "0.08:4:50", "--emit", &o("covering.csv")],
        vec!["npoint", "--tree", &o("tree.json"), "--n", "5", "--draws", "4", "--out", &o("npoint.json")],
    ]
    .into_iter()
    .map(|c| c.into_iter().map(String::from).collect())
    .collect();
    for name in
        ["dirac_one", "atom_plus_uniform", "two_atoms", "triangle", "atom_plus_triangle", "two_atoms_plus_uniform"]
    {
        cmds.push(
            [
                "classify",
                "--target",
                &f(&format!("classify/{name}.json")),
                "--out",
                &o(&format!("classify_{name}.json")),
            ]
            .map(String::from)
            .to_vec(),
        );
    }
    cmds
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs = [root.path().join("a"), root.path().join("b")];
    let mut commands = 0;
    for dir in &runs {
        std::fs::create_dir(dir).map_err(|e| e.to_string())?;
        for cmd in pipeline(dir) {
            let args = std::iter::once("feasidist".to_string()).chain(cmd.iter().cloned()).chain([
                "--seed".into(),
                "42".into(),
                "--quiet".into(),
            ]);
            let code = feasidist::cli::run(args);
            if code != 0 {
                return Err(format!("`{}` exited {code}", cmd.join(" ")));
            }
            commands += 1;
        }
    }
    let mut names: Vec<_> =
        std::fs::read_dir(&runs[0]).map_err(|e| e.to_string())?.map(|e| e.unwrap().file_name()).collect();
    names.sort();
    let differing: Vec<String> = names
        .iter()
        .filter(|n| std::fs::read(runs[0].join(n)).ok() != std::fs::read(runs[1].join(n)).ok())
        .map(|n| n.to_string_lossy().into_owned())
        .collect();
    check(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} commands run twice, {} artifacts byte-identical", commands / 2, names.len())
        } else {
            format!("differing artifacts: {}", differing.join(", "))
        },
    )
}

fn main() {
    let started = Instant::now();
    let random = random_targets(200);
    let build_time = started.elapsed();
    let mut trees = tree_fixtures();
    trees.extend(random.iter().cloned());

    let criteria: Vec<Criterion> = vec![
        ("finite targets realized exactly", Box::new(|| finite_realization(&random, build_time))),
        ("leaves at half the largest distance", Box::new(|| leaf_depths(&trees))),
        ("weight split constraints", Box::new(weight_split)),
        ("dyadic samplers match closed forms", Box::new(dyadic_sampling)),
        ("envelope branching rule", Box::new(envelope_rule)),
        ("level weights telescope", Box::new(telescoping)),
        ("built densities end to end", Box::new(density_end_to_end)),
        ("kernel sum bound", Box::new(kernel_sum_bound)),
        ("ten-level decomposition", Box::new(decomposition)),
        ("covering number bound", Box::new(|| covering(&trees))),
        ("classifier corpus", Box::new(classifier)),
        ("CLI artifacts deterministic", Box::new(determinism)),
    ];

    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let status = if outcome.is_ok() { "PASS" } else { "FAIL" };
        let detail = outcome.unwrap_or_else(|e| e);
        println!("criterion {:>2} {status} {name} ({:.1?}): {detail}", i + 1, t.elapsed());
        failed += usize::from(status == "FAIL");
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
