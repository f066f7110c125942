//! The `feasidist` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::builder::{
    build_composite, certify_domination, choose_margin_params, derive_params, domination_report, sample_composite,
    BuildParams, BuiltDensity, CertificateReport, CompositeSpace, MarginParams, DEFAULT_INTERIOR_POINTS,
};
use crate::distributions::{
    ks_statistic, total_variation_atoms, DiscreteDistribution, EmpiricalSample, FiniteTarget, TargetDensity,
};
use crate::dyadic::{
    psi_cdf, psi_density, sample_pair_distances, sample_root_distances, select_kappa_density, select_kappa_envelope,
    DyadicModel, EnvelopeFunction, KappaSequence,
};
use crate::error::{Error, Result};
use crate::feasibility::{classify, covering_sweep, TargetSpec, Verdict};
use crate::io::{parse_grid, read_json, write_csv, write_json};
use crate::mixture::{annealed_sample, decompose, AnnealedReport, MixtureSpace};
use crate::rng::{SamplerState, SeedRecord, DEFAULT_SEED};
use crate::tree::{
    build_finite, exact_two_point, sample_npoint_matrix, sample_two_point, TreeStructure, DEFAULT_LEAF_CAP,
    DEFAULT_PAIR_CAP,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CERTIFICATION: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

pub const SEED_ENV: &str = "FEASIDIST_SEED";

/// Largest total variation accepted by `verify-tree --mode exact`.
const EXACT_TV_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(name = "feasidist", version, about = "Measured metric spaces with prescribed two-point distance laws")]
struct Cli {
    /// Random seed (default: $FEASIDIST_SEED, else 42).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Omit CSV header rows.
    #[arg(long, global = true)]
    no_header: bool,
    /// Suppress the summary printed on stdout.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the finite tree realizing a finite target.
    BuildFinite {
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LEAF_CAP)]
        leaf_cap: usize,
    },
    /// Compare a tree's two-point law with a target.
    VerifyTree {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long, value_enum, default_value_t = VerifyMode::Exact)]
        mode: VerifyMode,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dyadic graft: distribution function, density and samples.
    Dyadic(DyadicArgs),
    /// Build a density up to the margin zeta.
    BuildDensity {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        zeta: f64,
        #[arg(long)]
        out: PathBuf,
        /// CSV of g on --grid.
        #[arg(long)]
        emit_g: Option<PathBuf>,
        /// a:b:count; defaults to 2001 points over the support of f.
        #[arg(long)]
        grid: Option<String>,
        /// Exit with status 2 unless g <= (1 + zeta) f on the certification grid.
        #[arg(long)]
        certify: bool,
        #[arg(long, default_value_t = 0)]
        samples: usize,
        /// Empirical CDF of the composite sample.
        #[arg(long)]
        emit_samples: Option<PathBuf>,
    },
    /// Split a density into built components and a residual.
    Decompose {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw from a random space of a decomposition.
    AnnealedSample {
        #[arg(long)]
        mixture: PathBuf,
        #[arg(long)]
        samples: usize,
        /// Histogram density CSV.
        #[arg(long)]
        emit: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        bins: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Feasibility verdict for a target.
    Classify {
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Covering-number lower bound over an eps sweep.
    Covering {
        #[arg(long)]
        tree: PathBuf,
        /// a:b:count, with a > 0.
        #[arg(long)]
        eps_grid: String,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Distance matrices of independent leaves.
    Npoint {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        draws: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct DyadicArgs {
    /// Comma separated branching prefix; the last value repeats.
    #[arg(long, value_delimiter = ',', group = "source")]
    kappa: Option<Vec<f64>>,
    /// Envelope JSON: the CDF stays below it near 0.
    #[arg(long, group = "source")]
    envelope: Option<PathBuf>,
    /// Density JSON: branching fast enough for this density.
    #[arg(long, group = "source")]
    density: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    emit_cdf: Option<PathBuf>,
    #[arg(long)]
    emit_density: Option<PathBuf>,
    #[arg(long, default_value = "0:4:401")]
    grid: String,
    #[arg(long, default_value_t = 0)]
    samples: usize,
    /// Sample root distances instead of pair distances.
    #[arg(long)]
    root: bool,
    #[arg(long)]
    emit_samples: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum VerifyMode {
    /// Enumerate all leaf pairs.
    Exact,
    /// Monte Carlo pair draws.
    Sample,
}

struct Ctx {
    seed: u64,
    header: bool,
    quiet: bool,
}

macro_rules! say {
    ($ctx:expr, $($arg:tt)*) => {
        if !$ctx.quiet {
            println!($($arg)*);
        }
    };
}

impl Ctx {
    fn rng(&self) -> SamplerState {
        SamplerState::from_seed(self.seed)
    }

    fn xy(&self, path: &Path, rows: impl IntoIterator<Item = (f64, f64)>) -> Result<()> {
        write_csv(path, &["x", "value"], rows, self.header)
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Certification { .. } => EXIT_CERTIFICATION,
        _ => EXIT_VALIDATION,
    }
}

fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidParameter(format!("{SEED_ENV}='{v}' is not a 64-bit unsigned integer"))),
        Err(_) => Ok(None),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                ErrorKind::InvalidSubcommand | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_USAGE,
                _ => EXIT_VALIDATION,
            };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: Cli) -> Result<i32> {
    let seed = match cli.seed {
        Some(s) => s,
        None => seed_from_env()?.unwrap_or(DEFAULT_SEED),
    };
    let ctx = Ctx { seed, header: !cli.no_header, quiet: cli.quiet };
    match cli.threads {
        Some(0) => Err(Error::InvalidParameter("--threads must be >= 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            pool.install(|| dispatch(cli.command, &ctx))
        }
        None => dispatch(cli.command, &ctx),
    }
}

fn dispatch(cmd: Command, ctx: &Ctx) -> Result<i32> {
    match cmd {
        Command::BuildFinite { target, out, leaf_cap } => build_finite_cmd(ctx, &target, &out, leaf_cap),
        Command::VerifyTree { tree, target, mode, samples, out } => {
            verify_tree_cmd(ctx, &tree, &target, mode, samples, out.as_deref())
        }
        Command::Dyadic(args) => dyadic_cmd(ctx, args),
        Command::BuildDensity { f, zeta, out, emit_g, grid, certify, samples, emit_samples } => build_density_cmd(
            ctx,
            &f,
            zeta,
            &out,
            emit_g.as_deref(),
            grid.as_deref(),
            certify,
            samples,
            emit_samples.as_deref(),
        ),
        Command::Decompose { f, levels, out } => decompose_cmd(ctx, &f, levels, &out),
        Command::AnnealedSample { mixture, samples, emit, bins, out } => {
            annealed_cmd(ctx, &mixture, samples, emit.as_deref(), bins, out.as_deref())
        }
        Command::Classify { target, out } => classify_cmd(ctx, &target, out.as_deref()),
        Command::Covering { tree, eps_grid, emit } => covering_cmd(ctx, &tree, &eps_grid, emit.as_deref()),
        Command::Npoint { tree, n, draws, out } => npoint_cmd(ctx, &tree, n, draws, &out),
    }
}

fn build_finite_cmd(ctx: &Ctx, target: &Path, out: &Path, leaf_cap: usize) -> Result<i32> {
    let theta: FiniteTarget<f64> = read_json(target)?;
    let tree = build_finite(&theta, leaf_cap)?;
    write_json(out, &tree)?;
    say!(ctx, "nodes {} leaves {} height {}", tree.node_count(), tree.leaf_mass().len(), theta.max_distance() / 2.0);
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct VerifyReport {
    mode: VerifyMode,
    total_variation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<SeedRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pass: Option<bool>,
}

fn verify_tree_cmd(
    ctx: &Ctx,
    tree: &Path,
    target: &Path,
    mode: VerifyMode,
    samples: usize,
    out: Option<&Path>,
) -> Result<i32> {
    let t: TreeStructure<f64> = read_json(tree)?;
    let theta: FiniteTarget<f64> = read_json(target)?;
    let want = theta.to_discrete();
    let report = match mode {
        VerifyMode::Exact => {
            let law = exact_two_point(&t, DEFAULT_PAIR_CAP)?;
            let tv = total_variation_atoms(&law, &want);
            VerifyReport { mode, total_variation: tv, samples: None, seed: None, pass: Some(tv <= EXACT_TV_TOL) }
        }
        VerifyMode::Sample => {
            if samples == 0 {
                return Err(Error::InvalidParameter("--samples must be >= 1".into()));
            }
            let mut rng = ctx.rng();
            let s = sample_two_point(&t, samples, &mut rng);
            let w = 1.0 / samples as f64;
            let empirical = DiscreteDistribution::from_weighted(s.values().iter().map(|&v| (v, w)));
            VerifyReport {
                mode,
                total_variation: total_variation_atoms(&empirical, &want),
                samples: Some(samples),
                seed: Some(s.seed()),
                pass: None,
            }
        }
    };
    say!(ctx, "total variation {:e}", report.total_variation);
    if let Some(p) = out {
        write_json(p, &report)?;
    }
    if report.pass == Some(false) {
        return Err(Error::Certification {
            level: 0,
            detail: format!("total variation {:e} > {EXACT_TV_TOL:e}", report.total_variation),
        });
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct DyadicArtifact<'a> {
    kappas: &'a KappaSequence<f64>,
    levels: usize,
    tail_at_depth: f64,
}

fn ecdf_rows(s: &EmpiricalSample<f64>) -> Vec<(f64, f64)> {
    let mut v = s.values().to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.into_iter().enumerate().map(|(i, x)| (x, (i + 1) as f64 / n)).collect()
}

fn dyadic_cmd(ctx: &Ctx, a: DyadicArgs) -> Result<i32> {
    let kappas = match (&a.kappa, &a.envelope, &a.density) {
        (Some(k), None, None) => KappaSequence::explicit(k.clone())?,
        (None, Some(p), None) => select_kappa_envelope(&read_json::<EnvelopeFunction<f64>>(p)?)?,
        (None, None, Some(p)) => select_kappa_density(&read_json::<TargetDensity<f64>>(p)?)?,
        _ => return Err(Error::InvalidParameter("give exactly one of --kappa, --envelope, --density".into())),
    };
    let model = DyadicModel::new(kappas);
    let grid = parse_grid(&a.grid)?;
    if let Some(p) = &a.emit_cdf {
        ctx.xy(p, grid.iter().map(|&x| (x, psi_cdf(&model, x))))?;
    }
    if let Some(p) = &a.emit_density {
        ctx.xy(p, grid.iter().map(|&x| (x, psi_density(&model, x))))?;
    }
    if a.samples > 0 {
        let mut rng = ctx.rng();
        let s = if a.root {
            sample_root_distances(&model, a.samples, &mut rng)
        } else {
            sample_pair_distances(&model, a.samples, &mut rng)
        };
        say!(ctx, "samples {} mean {}", s.len(), s.mean());
        if let Some(p) = &a.emit_samples {
            ctx.xy(p, ecdf_rows(&s))?;
        }
    }
    if let Some(p) = &a.out {
        write_json(
            p,
            &DyadicArtifact { kappas: model.kappas(), levels: model.depth(), tail_at_depth: model.tail(model.depth()) },
        )?;
    }
    say!(ctx, "levels {}", model.depth());
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SampleCheck {
    count: usize,
    seed: SeedRecord,
    ks_against_g: f64,
}

#[derive(Serialize)]
struct DensityArtifact<'a> {
    zeta: f64,
    margin: MarginParams<f64>,
    params: &'a BuildParams<f64>,
    space: &'a CompositeSpace<f64>,
    density: &'a BuiltDensity<f64>,
    integral: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<&'a CertificateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sample_check: Option<SampleCheck>,
}

#[allow(clippy::too_many_arguments)]
fn build_density_cmd(
    ctx: &Ctx,
    f_path: &Path,
    zeta: f64,
    out: &Path,
    emit_g: Option<&Path>,
    grid: Option<&str>,
    certify: bool,
    samples: usize,
    emit_samples: Option<&Path>,
) -> Result<i32> {
    let f: TargetDensity<f64> = read_json(f_path)?;
    let margin = choose_margin_params(zeta)?;
    let params = derive_params(&f, margin.beta, margin.n)?;
    let g = BuiltDensity::new(&params, &f);
    let space = build_composite(&params, &f, DEFAULT_LEAF_CAP)?;
    say!(
        ctx,
        "beta {} n {} intervals {} eps {:e} p0 {:e} alpha {}",
        params.beta,
        params.n,
        params.k(),
        params.eps,
        params.p0,
        params.alpha
    );
    let certificate = certify.then(|| domination_report(&g, &f, zeta, DEFAULT_INTERIOR_POINTS));
    if let Some(c) = &certificate {
        say!(ctx, "max ratio {} bound {} points {} pass {}", c.max_ratio, c.bound, c.points_checked, c.pass);
    }
    let sample_check = (samples > 0).then(|| {
        let s = sample_composite(&space, samples, &ctx.rng());
        (ks_statistic(&s, &g), s)
    });
    if let (Some(p), Some((_, s))) = (emit_samples, &sample_check) {
        ctx.xy(p, ecdf_rows(s))?;
    }
    if let Some(p) = emit_g {
        let xs = match grid {
            Some(spec) => parse_grid(spec)?,
            None => parse_grid(&format!("0:{}:2001", f.shape().end()))?,
        };
        ctx.xy(p, xs.iter().map(|&x| (x, g.eval(x))))?;
    }
    let artifact = DensityArtifact {
        zeta,
        margin,
        params: &params,
        space: &space,
        density: &g,
        integral: g.integral(),
        certificate: certificate.as_ref(),
        sample_check: sample_check.map(|(ks, s)| {
            say!(ctx, "composite sample KS {ks}");
            SampleCheck { count: s.len(), seed: s.seed(), ks_against_g: ks }
        }),
    };
    write_json(out, &artifact)?;
    if certify {
        // failure detail is produced by the same check
        certify_domination(&g, &f, zeta)?;
    }
    Ok(EXIT_OK)
}

fn decompose_cmd(ctx: &Ctx, f_path: &Path, levels: usize, out: &Path) -> Result<i32> {
    let f: TargetDensity<f64> = read_json(f_path)?;
    let m = decompose(&f, levels)?;
    for c in &m.components {
        say!(ctx, "level {} weight {} max ratio {} drift {:e}", c.level, c.weight, c.certificate.max_ratio, c.drift);
    }
    write_json(out, &m)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct AnnealedArtifact {
    count: usize,
    seed: SeedRecord,
    report: AnnealedReport,
    ks_against_target: f64,
}

fn annealed_cmd(
    ctx: &Ctx,
    mixture: &Path,
    samples: usize,
    emit: Option<&Path>,
    bins: usize,
    out: Option<&Path>,
) -> Result<i32> {
    if samples == 0 || bins == 0 {
        return Err(Error::InvalidParameter("--samples and --bins must be >= 1".into()));
    }
    let m: MixtureSpace<f64> = read_json(mixture)?;
    let (s, report) = annealed_sample(&m, samples, &ctx.rng());
    let ks = ks_statistic(&s, &m.target);
    say!(ctx, "draws per level {:?} residual {} KS {ks}", report.component_draws, report.residual_draws);
    if let Some(p) = emit {
        let end = m.target.shape().end();
        let width = end / bins as f64;
        let mut counts = vec![0u64; bins];
        for &v in s.values() {
            counts[((v / width) as usize).min(bins - 1)] += 1;
        }
        let rows =
            counts.iter().enumerate().map(|(i, &c)| ((i as f64 + 0.5) * width, c as f64 / (samples as f64 * width)));
        ctx.xy(p, rows)?;
    }
    if let Some(p) = out {
        write_json(p, &AnnealedArtifact { count: samples, seed: s.seed(), report, ks_against_target: ks })?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ClassifyArtifact {
    verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    positivity_radius: Option<f64>,
}

fn classify_cmd(ctx: &Ctx, target: &Path, out: Option<&Path>) -> Result<i32> {
    let spec: TargetSpec<f64> = read_json(target)?;
    let verdict = classify(&spec);
    say!(ctx, "{verdict}");
    if let Some(p) = out {
        write_json(p, &ClassifyArtifact { verdict, positivity_radius: spec.positivity_radius() })?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CoveringRow {
    x: f64,
    value: f64,
    m_greedy: usize,
    inverse_m: f64,
    verdict: bool,
}

fn covering_cmd(ctx: &Ctx, tree: &Path, eps_grid: &str, emit: Option<&Path>) -> Result<i32> {
    let t: TreeStructure<f64> = read_json(tree)?;
    let reports = covering_sweep(&t, &parse_grid(eps_grid)?)?;
    if let Some(p) = emit {
        let rows = reports.iter().map(|r| CoveringRow {
            x: r.eps,
            value: r.p_d_le_eps,
            m_greedy: r.m_greedy,
            inverse_m: 1.0 / r.m_greedy as f64,
            verdict: r.verdict,
        });
        write_csv(p, &["x", "value", "m_greedy", "inverse_m", "verdict"], rows, ctx.header)?;
    }
    let failed: Vec<f64> = reports.iter().filter(|r| !r.verdict).map(|r| r.eps).collect();
    say!(ctx, "eps points {} failures {}", reports.len(), failed.len());
    if !failed.is_empty() {
        return Err(Error::Certification { level: 0, detail: format!("covering bound fails at eps {failed:?}") });
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct NpointArtifact {
    n: usize,
    seed: SeedRecord,
    matrices: Vec<Vec<Vec<f64>>>,
}

fn npoint_cmd(ctx: &Ctx, tree: &Path, n: usize, draws: usize, out: &Path) -> Result<i32> {
    if n == 0 || draws == 0 {
        return Err(Error::InvalidParameter("--n and --draws must be >= 1".into()));
    }
    let t: TreeStructure<f64> = read_json(tree)?;
    let mut rng = ctx.rng();
    let seed = rng.record();
    let matrices = (0..draws).map(|_| sample_npoint_matrix(&t, n, &mut rng)).collect();
    write_json(out, &NpointArtifact { n, seed, matrices })?;
    Ok(EXIT_OK)
}
