//! The verification suites behind `jointspec verify`.
//!
//! Each suite exercises one family of identities on a commuting tuple, either
//! read from disk or generated from a model family and a seed. Test regions
//! are balls and squares sized from the gaps between cluster points, so no
//! check ever lands on a boundary.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Subspace, C64};
use crate::measures::{
    brown, convolve_additive, convolve_multiplicative, measure_distance, product_measure, pushforward,
    verify_distribution_extension, AtomicMeasure, MapDescriptor, Polynomial,
};
use crate::models::{rng_from_seed, ModelSpec};
use crate::potential;
use crate::regions::{verify_general_borel, verify_preimage_projection, Region};
use crate::report::Report;
use crate::spectral::{self, restrict, CommutingTuple, JointDecomposition};
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    BoxFormula,
    SigmaAdditivity,
    Lattice,
    Restriction,
    Maximality,
    Characterization,
    Radius,
    Pushforward,
    Tensor,
    PreimageProjection,
    GeneralBorel,
    DistributionExtension,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::BoxFormula,
        Suite::SigmaAdditivity,
        Suite::Lattice,
        Suite::Restriction,
        Suite::Maximality,
        Suite::Characterization,
        Suite::Radius,
        Suite::Pushforward,
        Suite::Tensor,
        Suite::PreimageProjection,
        Suite::GeneralBorel,
        Suite::DistributionExtension,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::BoxFormula => "box-formula",
            Suite::SigmaAdditivity => "sigma-additivity",
            Suite::Lattice => "lattice",
            Suite::Restriction => "restriction",
            Suite::Maximality => "maximality",
            Suite::Characterization => "characterization",
            Suite::Radius => "radius",
            Suite::Pushforward => "pushforward",
            Suite::Tensor => "tensor",
            Suite::PreimageProjection => "preimage-projection",
            Suite::GeneralBorel => "general-borel",
            Suite::DistributionExtension => "distribution-extension",
        }
    }

    /// Operators a generated tuple needs for this suite.
    fn arity(self) -> usize {
        match self {
            Suite::Lattice | Suite::Restriction | Suite::SigmaAdditivity => 1,
            Suite::Pushforward => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == key || (key == "convolution" && *suite == Suite::Tensor))
            .ok_or_else(|| Error::Format(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    ConjugatedDiagonal,
    PolyOfJordan,
    KroneckerPair,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::ConjugatedDiagonal, ModelKind::PolyOfJordan, ModelKind::KroneckerPair];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::ConjugatedDiagonal => "conjugated_diagonal",
            ModelKind::PolyOfJordan => "poly_of_jordan",
            ModelKind::KroneckerPair => "kronecker_pair",
        }
    }

    /// A model of this family with dimension at most `max_dim`, drawn from `seed`.
    pub fn spec(self, seed: u64, arity: usize, max_dim: usize) -> ModelSpec {
        let mut rng = rng_from_seed(seed);
        let max_dim = max_dim.max(2);
        match self {
            ModelKind::ConjugatedDiagonal => ModelSpec::ConjugatedDiagonal {
                d: rng.random_range(2..=max_dim),
                n: arity,
                seed,
                conditioning: 10.0,
            },
            ModelKind::PolyOfJordan => {
                let polynomials = (0..arity).map(|_| random_polynomial(&mut rng, 1, 2)).collect();
                ModelSpec::PolyOfJordan {
                    d: rng.random_range(2..=max_dim),
                    polynomials,
                    layout: Vec::new(),
                    seed,
                    conditioning: 1.0,
                }
            }
            ModelKind::KroneckerPair => {
                let d1 = rng.random_range(1..=max_dim.min(8));
                let d2 = rng.random_range(1..=(max_dim / d1).clamp(1, 8));
                ModelSpec::KroneckerPair { d1, d2, seed }
            }
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::Format(format!("unknown model family '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteOptions {
    pub tol: Tolerances,
    /// Random draws per randomized check.
    pub trials: usize,
    /// Largest dimension of a generated tuple.
    pub max_dim: usize,
    pub cover_depth: u32,
    pub grid_depth: u32,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { tol: Tolerances::default(), trials: 8, max_dim: 32, cover_depth: 8, grid_depth: 4 }
    }
}

/// Where a run's tuple came from.
#[derive(Debug, Clone)]
pub enum Source {
    Model(ModelKind),
    Tuple { name: String, tuple: CommutingTuple },
}

impl Source {
    fn label(&self) -> String {
        match self {
            Source::Model(k) => k.name().to_string(),
            Source::Tuple { name, .. } => name.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteRun {
    pub suite: Suite,
    pub source: String,
    pub seed: u64,
    pub dim: usize,
    pub reports: Vec<Report>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub tolerances: Tolerances,
    pub runs: Vec<SuiteRun>,
    pub checks: usize,
    pub failures: usize,
    pub passed: bool,
}

impl SuiteReport {
    fn from_runs(tolerances: Tolerances, runs: Vec<SuiteRun>) -> Self {
        let checks = runs.iter().flat_map(|r| &r.reports).map(|r| r.checks.len()).sum();
        let failures = runs.iter().flat_map(|r| &r.reports).map(|r| r.failures().count()).sum();
        SuiteReport { tolerances, runs, checks, failures, passed: failures == 0 }
    }
}

/// Every selected suite on every source and seed. An empty selection yields an
/// empty, passing report.
pub fn run(suites: &[Suite], sources: &[Source], seeds: &[u64], opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut runs = Vec::new();
    for &suite in suites {
        for source in sources {
            for &seed in seeds {
                let (tuple, oracle, factors) = match source {
                    Source::Model(kind) => {
                        let model = kind.spec(seed, suite.arity(), opts.max_dim).generate()?;
                        (CommutingTuple::with_tol(model.mats, opts.tol.commute)?, model.oracle, model.factors)
                    }
                    Source::Tuple { tuple, .. } => (tuple.clone(), None, Vec::new()),
                };
                let mut rng = rng_from_seed(seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(suite as u64 + 1)));
                let ctx = Context { tuple: &tuple, oracle: oracle.as_ref(), factors: &factors, opts };
                let reports = run_one(suite, &ctx, &mut rng)?;
                runs.push(SuiteRun { suite, source: source.label(), seed, dim: tuple.dim(), reports });
            }
        }
    }
    Ok(SuiteReport::from_runs(opts.tol, runs))
}

struct Context<'a> {
    tuple: &'a CommutingTuple,
    oracle: Option<&'a AtomicMeasure>,
    factors: &'a [CMatrix],
    opts: &'a SuiteOptions,
}

impl Context<'_> {
    fn decompose(&self, tuple: &CommutingTuple) -> Result<JointDecomposition> {
        JointDecomposition::compute_with(tuple, &self.opts.tol)
    }

    /// A commuting pair drawn from the tuple: its first two operators, or
    /// `(T, T^2)` for a single operator.
    fn pair(&self) -> Result<CommutingTuple> {
        let m = self.tuple.mats();
        let pair = if m.len() >= 2 { vec![m[0].clone(), m[1].clone()] } else { vec![m[0].clone(), &m[0] * &m[0]] };
        CommutingTuple::with_tol(pair, self.opts.tol.commute)
    }
}

fn run_one(suite: Suite, ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Vec<Report>> {
    let tol = &ctx.opts.tol;
    let trials = ctx.opts.trials;
    match suite {
        Suite::BoxFormula => {
            let dec = ctx.decompose(ctx.tuple)?;
            let mut reports = Vec::new();
            for _ in 0..trials.min(dec.clusters().len()).max(1) {
                let k = rng.random_range(0..dec.clusters().len());
                reports.push(spectral::verify_box_formula(&dec, &cluster_box(&dec, k))?);
            }
            Ok(reports)
        }
        Suite::SigmaAdditivity => {
            let dec = ctx.decompose(ctx.tuple)?;
            let r = isolation_radius(&dec);
            let mut pieces: Vec<Region> = Vec::new();
            for c in dec.clusters().iter().take(7) {
                pieces.push(Region::open_ball(c.point.clone(), r));
            }
            let rest = Region::complement(Region::union(pieces.clone()));
            pieces.push(rest);
            Ok(vec![spectral::verify_sigma_additivity(&dec, &pieces)?])
        }
        Suite::Lattice => {
            let mut reports = Vec::new();
            for t in ctx.tuple.mats() {
                let dec = ctx.decompose(&CommutingTuple::single(t.clone())?)?;
                let a = random_cluster_union(&dec, rng);
                let b = random_cluster_union(&dec, rng);
                reports.push(spectral::verify_lattice_identities(&dec, &a, &b)?);
            }
            Ok(reports)
        }
        Suite::Restriction => {
            let mut reports = Vec::new();
            for t in ctx.tuple.mats() {
                let dec = ctx.decompose(&CommutingTuple::single(t.clone())?)?;
                for _ in 0..trials.min(4) {
                    let b = random_cluster_union(&dec, rng);
                    let p = random_invariant_subspace(t, &dec, rng)?;
                    reports.push(spectral::verify_restriction_identity(t, &p, &b)?);
                }
            }
            Ok(reports)
        }
        Suite::Maximality => {
            let dec = ctx.decompose(ctx.tuple)?;
            let b = random_cluster_union(&dec, rng);
            Ok(vec![
                spectral::verify_maximality(&dec, &b, trials, rng)?,
                spectral::verify_polynomial_invariance(&dec, &b, trials, rng)?,
            ])
        }
        Suite::Characterization => {
            let dec = ctx.decompose(ctx.tuple)?;
            let mut report = Report::new("characterization");
            let n = ctx.tuple.arity();
            let mut accepted = 0;
            let mut attempts = 0;
            while accepted < trials && attempts < 20 * trials.max(1) {
                attempts += 1;
                let alpha: Vec<C64> = (0..n).map(|_| random_c64(rng, 1.0)).collect();
                let lambda = if accepted % 2 == 0 { C64::new(1.0, 0.0) } else { random_c64(rng, 2.0) };
                match potential::characterization_gap_at(ctx.tuple, &dec, &alpha, lambda) {
                    Ok(gap) => {
                        report.check_le(format!("gap at alpha #{accepted}, lambda {lambda:.3}"), gap, tol.gap);
                        accepted += 1;
                    }
                    Err(Error::IllPosedAlpha { .. }) => continue,
                    Err(e) => return Err(e),
                }
            }
            let mut reports = vec![report];
            if let Some(oracle) = ctx.oracle {
                let mut r = Report::new("oracle");
                r.check_le("joint Brown measure matches the model oracle", measure_distance(&brown(&dec), oracle)?, tol.measure);
                reports.push(r);
            }
            Ok(reports)
        }
        Suite::Radius => {
            let m = ctx.tuple.mats();
            let mut reports = Vec::new();
            if m.len() == 1 {
                reports.push(potential::verify_radius_inequalities_with(&m[0], &m[0], tol)?);
                reports.push(potential::verify_radius_inequalities_with(&m[0], &(&m[0] * &m[0]), tol)?);
            }
            for i in 0..m.len().min(3) {
                for j in (i + 1)..m.len().min(3) {
                    reports.push(potential::verify_radius_inequalities_with(&m[i], &m[j], tol)?);
                }
            }
            Ok(reports)
        }
        Suite::Pushforward => pushforward_reports(ctx, rng),
        Suite::Tensor => tensor_reports(ctx),
        Suite::PreimageProjection => {
            let dec = ctx.decompose(&ctx.pair()?)?;
            let u = preimage_target(&dec, rng);
            Ok(vec![verify_preimage_projection(&dec, &u, ctx.opts.cover_depth)?])
        }
        Suite::GeneralBorel => {
            let dec = ctx.decompose(ctx.tuple)?;
            let r = isolation_radius(&dec);
            let k = rng.random_range(0..dec.clusters().len());
            let p = dec.clusters()[k].point.clone();
            let point = Region::closed_ball(p.clone(), (0.01 * r).min(1e-7));
            let opens: Vec<Region> = (0..8).map(|j| Region::open_ball(p.clone(), r * (-(j as f64)).exp2())).collect();
            let mut reports = vec![verify_general_borel(&dec, &point, &opens)?];
            // A closed ball around a second cluster, approached from outside.
            let q = dec.clusters()[rng.random_range(0..dec.clusters().len())].point.clone();
            let closed = Region::closed_ball(q.clone(), 0.5 * r);
            let opens: Vec<Region> =
                (1..8).map(|j| Region::open_ball(q.clone(), 0.5 * r * (1.0 + (-(j as f64)).exp2()))).collect();
            reports.push(verify_general_borel(&dec, &closed, &opens)?);
            Ok(reports)
        }
        Suite::DistributionExtension => {
            let dec = ctx.decompose(&ctx.pair()?)?;
            Ok(vec![verify_distribution_extension(&dec, ctx.opts.grid_depth)?])
        }
    }
}

fn random_c64<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> C64 {
    C64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale))
}

/// A polynomial in `nvars` variables with up to four terms of total degree at
/// most `max_degree`.
pub fn random_polynomial<R: Rng + ?Sized>(rng: &mut R, nvars: usize, max_degree: u32) -> Polynomial {
    let terms: Vec<(C64, Vec<u32>)> = (0..rng.random_range(1..=4))
        .map(|_| {
            let mut exp = vec![0u32; nvars];
            for _ in 0..rng.random_range(0..=max_degree) {
                exp[rng.random_range(0..nvars)] += 1;
            }
            (random_c64(rng, 1.0), exp)
        })
        .collect();
    let refs: Vec<(C64, &[u32])> = terms.iter().map(|(c, e)| (*c, e.as_slice())).collect();
    Polynomial::from_terms(nvars, &refs).expect("exponents match the variable count")
}

/// Euclidean distance between points of `C^n`.
fn point_distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// A third of the smallest distance between cluster points (1 for one cluster).
fn isolation_radius(dec: &JointDecomposition) -> f64 {
    let c = dec.clusters();
    let mut gap = f64::INFINITY;
    for i in 0..c.len() {
        for j in (i + 1)..c.len() {
            gap = gap.min(point_distance(&c[i].point, &c[j].point));
        }
    }
    if gap.is_finite() {
        gap / 3.0
    } else {
        1.0
    }
}

/// Squares around the coordinates of cluster `k`, each catching exactly the
/// clusters whose coordinate coincides.
fn cluster_box(dec: &JointDecomposition, k: usize) -> Vec<Region> {
    let merge = crate::tol::MERGE;
    let center = &dec.clusters()[k].point;
    (0..dec.arity())
        .map(|i| {
            let z = center[i];
            let gap = dec
                .clusters()
                .iter()
                .map(|c| {
                    let w = c.point[i] - z;
                    w.re.abs().max(w.im.abs())
                })
                .filter(|&g| g > merge)
                .fold(f64::INFINITY, f64::min);
            let delta = if gap.is_finite() { 0.4 * gap } else { 1.0 };
            Region::square(z, delta)
        })
        .collect()
}

/// Union of balls around a random non-empty subset of the clusters.
fn random_cluster_union(dec: &JointDecomposition, rng: &mut ChaCha8Rng) -> Region {
    let r = isolation_radius(dec);
    let mut members: Vec<Region> = dec
        .clusters()
        .iter()
        .filter(|_| rng.random_bool(0.5))
        .map(|c| Region::open_ball(c.point.clone(), r))
        .collect();
    if members.is_empty() {
        let c = &dec.clusters()[rng.random_range(0..dec.clusters().len())];
        members.push(Region::open_ball(c.point.clone(), r));
    }
    Region::union(members)
}

/// A leading Schur block of `T`, or a join of cluster spaces.
fn random_invariant_subspace(t: &CMatrix, dec: &JointDecomposition, rng: &mut ChaCha8Rng) -> Result<Subspace> {
    let d = t.nrows();
    if rng.random_bool(0.5) {
        let s = linalg::schur(t)?;
        let k = rng.random_range(0..=d);
        Ok(Subspace::span(&s.q.columns(0, k).into_owned()))
    } else {
        let picked: Vec<&Subspace> = dec.clusters().iter().filter(|_| rng.random_bool(0.5)).map(|c| &c.space).collect();
        Subspace::join_all(d, picked)
    }
}

/// Smallest distance between distinct images of atoms under `f`.
fn image_separation(mu: &AtomicMeasure, f: impl Fn(&[C64]) -> Result<C64>) -> Result<f64> {
    let imgs = mu.atoms().iter().map(|a| f(&a.point)).collect::<Result<Vec<_>>>()?;
    let mut sep = f64::INFINITY;
    for i in 0..imgs.len() {
        for j in (i + 1)..imgs.len() {
            let g = (imgs[i] - imgs[j]).norm();
            if g > 0.0 {
                sep = sep.min(g);
            }
        }
    }
    Ok(sep)
}

fn pushforward_reports(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Vec<Report>> {
    let tol = ctx.opts.tol.measure;
    let dec = ctx.decompose(ctx.tuple)?;
    let mu = brown(&dec);
    let n = ctx.tuple.arity();
    let mut report = Report::new("polynomial push-forward");
    let mut tested = 0;
    let mut attempts = 0;
    while tested < ctx.opts.trials && attempts < 20 * ctx.opts.trials.max(1) {
        attempts += 1;
        let q = random_polynomial(rng, n, 3);
        // Distinct atoms must stay distinguishable after the map.
        if image_separation(&mu, |z| q.eval(z))? < 1e-3 {
            continue;
        }
        let direct = brown(&ctx.decompose(&CommutingTuple::single(q.eval_matrices(ctx.tuple.mats())?)?)?);
        let pushed = pushforward(&mu, &MapDescriptor::Polynomial { poly: q })?;
        report.check_le(format!("mu_q(T) = q_* mu_T (polynomial #{tested})"), measure_distance(&direct, &pushed)?, tol);
        tested += 1;
    }
    let mut reports = vec![report];
    if n == 3 {
        reports.push(worked_polynomial(ctx, &mu)?);
    }
    Ok(reports)
}

/// `q = 1 + 2 z2^2 + z1 z2 z3`, and `q - 1` factored through duplications,
/// scaled products, a permutation and a sum, checked at every stage.
fn worked_polynomial(ctx: &Context, mu: &AtomicMeasure) -> Result<Report> {
    let tol = ctx.opts.tol.measure;
    let mut report = Report::new("worked polynomial");
    let one = C64::new(1.0, 0.0);
    let two = C64::new(2.0, 0.0);
    let q = Polynomial::from_terms(3, &[(one, &[0, 0, 0]), (two, &[0, 2, 0]), (one, &[1, 1, 1])])?;
    let direct = brown(&ctx.decompose(&CommutingTuple::single(q.eval_matrices(ctx.tuple.mats())?)?)?);
    let pushed = pushforward(mu, &MapDescriptor::Polynomial { poly: q })?;
    report.check_le("mu_q(T) = q_* mu_T for q = 1 + 2 z2^2 + z1 z2 z3", measure_distance(&direct, &pushed)?, tol);

    let chain = [
        MapDescriptor::Duplicate { index: 1 },
        MapDescriptor::Duplicate { index: 1 },
        MapDescriptor::MulLast { alpha: two },
        MapDescriptor::Permutation { perm: vec![3, 0, 1, 2] },
        MapDescriptor::MulLast { alpha: one },
        MapDescriptor::MulLast { alpha: one },
        MapDescriptor::AddLast,
    ];
    let mut measure = mu.clone();
    let mut mats = ctx.tuple.mats().to_vec();
    for (k, step) in chain.iter().enumerate() {
        measure = pushforward(&measure, step)?;
        mats = step.apply_to_tuple(&mats)?;
        let staged = brown(&ctx.decompose(&CommutingTuple::with_tol(mats.clone(), ctx.opts.tol.commute)?)?);
        report.check_le(format!("stage {k}: Brown measure of mapped tuple = pushed measure"), measure_distance(&staged, &measure)?, tol);
    }
    let q1 = Polynomial::from_terms(3, &[(two, &[0, 2, 0]), (one, &[1, 1, 1])])?;
    let via_poly = pushforward(mu, &MapDescriptor::Polynomial { poly: q1 })?;
    report.check_le("composed chain = push-forward by q - 1", measure_distance(&measure, &via_poly)?, tol);
    Ok(report)
}

/// Factor dimension cap for the tensor suite (products stay at most 64).
const TENSOR_FACTOR_MAX: usize = 8;

fn tensor_reports(ctx: &Context) -> Result<Vec<Report>> {
    let tol = ctx.opts.tol.measure;
    let (s, t) = if ctx.factors.len() == 2 {
        (ctx.factors[0].clone(), ctx.factors[1].clone())
    } else {
        let m = ctx.tuple.mats();
        let second = if m.len() >= 2 { &m[1] } else { &m[0] };
        (leading_block(&m[0])?, leading_block(second)?)
    };
    let mut report = Report::new("tensor products and convolutions");
    let mu_s = brown(&ctx.decompose(&CommutingTuple::single(s.clone())?)?);
    let mu_t = brown(&ctx.decompose(&CommutingTuple::single(t.clone())?)?);
    let (d1, d2) = (s.nrows(), t.nrows());
    let a = linalg::kronecker(&s, &linalg::identity(d2))?;
    let b = linalg::kronecker(&linalg::identity(d1), &t)?;
    let pair = CommutingTuple::with_tol(vec![a.clone(), b.clone()], ctx.opts.tol.commute)?;
    let joint = brown(&ctx.decompose(&pair)?);
    let product = product_measure(&mu_s, &mu_t);
    report.check_le("mu_(S x 1, 1 x T) = mu_S x mu_T", measure_distance(&joint, &product)?, tol);

    // Sums and products of defective factors have Jordan blocks of size 3 or
    // more, whose computed eigenvalues scatter far beyond the cluster floor.
    let semisimple = is_semisimple(&s)? && is_semisimple(&t)?;
    let sep_sum = image_separation(&product, |z| Ok(z[0] + z[1]))?;
    let sep_prod = image_separation(&product, |z| Ok(z[0] * z[1]))?;
    if semisimple && sep_sum >= 1e-4 {
        let sum = brown(&ctx.decompose(&CommutingTuple::single(&a + &b)?)?);
        report.check_le("mu_(S x 1 + 1 x T) = mu_S * mu_T", measure_distance(&sum, &convolve_additive(&mu_s, &mu_t)?)?, tol);
    }
    if semisimple && sep_prod >= 1e-4 {
        let prod = brown(&ctx.decompose(&CommutingTuple::single(linalg::kronecker(&s, &t)?)?)?);
        report.check_le(
            "mu_(S x T) = multiplicative convolution",
            measure_distance(&prod, &convolve_multiplicative(&mu_s, &mu_t)?)?,
            tol,
        );
    }
    if let Some(oracle) = ctx.oracle.filter(|_| ctx.factors.len() == 2) {
        report.check_le("joint measure matches the model oracle", measure_distance(&joint, oracle)?, tol);
    }
    Ok(vec![report])
}

/// Whether `T` acts as a scalar on each of its cluster spaces.
fn is_semisimple(t: &CMatrix) -> Result<bool> {
    let dec = JointDecomposition::of_matrix(t)?;
    let scale = linalg::frobenius(t).max(1.0);
    Ok(dec.clusters().iter().all(|c| {
        let f = c.space.frame();
        (t * f - f * c.point[0]).norm() <= 1e-8 * scale
    }))
}

/// `T` compressed to its leading Schur block of size at most
/// [`TENSOR_FACTOR_MAX`], an invariant restriction.
fn leading_block(t: &CMatrix) -> Result<CMatrix> {
    let d = t.nrows();
    if d <= TENSOR_FACTOR_MAX {
        return Ok(t.clone());
    }
    let q = linalg::schur(t)?.q.columns(0, TENSOR_FACTOR_MAX).into_owned();
    restrict(t, &Subspace::from_orthonormal(q)?)
}

/// An open disk around a sum image whose boundary stays clear of every sum
/// and product image; the whole spectrum's neighbourhood when none is found.
fn preimage_target(dec: &JointDecomposition, rng: &mut ChaCha8Rng) -> Region {
    let mut images: Vec<C64> = Vec::new();
    for c in dec.clusters() {
        images.push(c.point[0] + c.point[1]);
        images.push(c.point[0] * c.point[1]);
    }
    let spread = images.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for _ in 0..20 {
        let c = dec.clusters()[rng.random_range(0..dec.clusters().len())].point.iter().sum::<C64>();
        let mut dist: Vec<f64> = images.iter().map(|z| (z - c).norm()).collect();
        dist.sort_by(f64::total_cmp);
        for w in dist.windows(2) {
            if w[1] - w[0] > 0.1 {
                return Region::open_disk(c, 0.5 * (w[0] + w[1]));
            }
        }
    }
    Region::open_disk(C64::new(0.0, 0.0), spread + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert_eq!("convolution".parse::<Suite>().unwrap(), Suite::Tensor);
        assert!("nonsense".parse::<Suite>().is_err());
        assert_eq!("poly-of-jordan".parse::<ModelKind>().unwrap(), ModelKind::PolyOfJordan);
    }

    #[test]
    fn empty_selection_is_an_empty_pass() {
        let r = run(&[], &[Source::Model(ModelKind::ConjugatedDiagonal)], &[1], &SuiteOptions::default()).unwrap();
        assert!(r.passed);
        assert!(r.runs.is_empty());
    }

    #[test]
    fn every_suite_passes_on_small_models() {
        let opts = SuiteOptions { max_dim: 8, trials: 3, cover_depth: 6, grid_depth: 3, ..Default::default() };
        let sources: Vec<Source> = ModelKind::ALL.into_iter().map(Source::Model).collect();
        let r = run(&Suite::ALL, &sources, &[1, 2], &opts).unwrap();
        let failures: Vec<String> = r
            .runs
            .iter()
            .flat_map(|run| run.reports.iter().flat_map(move |rep| rep.failures().map(move |c| format!("{} {} {}: {}", run.suite, run.source, run.seed, c.assertion))))
            .collect();
        assert!(failures.is_empty(), "{failures:#?}");
        assert_eq!(r.runs.len(), Suite::ALL.len() * sources.len() * 2);
    }

    #[test]
    fn explicit_single_operator() {
        let t = linalg::real_matrix(&[&[0.3, 1.0, 0.0], &[0.0, 0.3, 0.0], &[0.0, 0.0, -0.7]]);
        let source = Source::Tuple { name: "jordan".into(), tuple: CommutingTuple::single(t).unwrap() };
        let opts = SuiteOptions { cover_depth: 6, grid_depth: 3, ..Default::default() };
        for suite in Suite::ALL {
            if let Err(e) = run(&[suite], std::slice::from_ref(&source), &[7], &opts) {
                panic!("{suite}: {e}");
            }
        }
        let r = run(&Suite::ALL, &[source], &[7], &opts).unwrap();
        assert!(r.passed, "{:#?}", r.runs.iter().flat_map(|x| &x.reports).flat_map(|x| x.failures()).collect::<Vec<_>>());
    }
}
