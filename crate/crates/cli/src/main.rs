mod error;
mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use jointspec::linalg::MatrixJson;
use jointspec::measures::{brown, AtomicMeasure};
use jointspec::models::ModelSpec;
use jointspec::potential::{self, GridSpec};
use jointspec::regions::{dyadic_cover, verify_cover, CoverMap};
use jointspec::spectral::JointDecomposition;
use jointspec::suite::{self, ModelKind, Source, Suite, SuiteOptions};
use jointspec::{Region, Tolerances};

use error::{exit, CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "jointspec", version, about = "Joint Brown measures and spectral subspaces of commuting matrix tuples")]
struct Cli {
    #[command(flatten)]
    tol: TolArgs,

    #[command(subcommand)]
    command: Command,
}

/// Overrides for the library tolerances; every report echoes the values used.
#[derive(Args, Debug)]
struct TolArgs {
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    #[arg(long, global = true)]
    tol_angle: Option<f64>,
    #[arg(long, global = true)]
    tol_cluster: Option<f64>,
    #[arg(long, global = true)]
    tol_boundary: Option<f64>,
    #[arg(long, global = true)]
    tol_commute: Option<f64>,
    #[arg(long, global = true)]
    tol_invariance: Option<f64>,
    #[arg(long, global = true)]
    tol_subspace: Option<f64>,
    #[arg(long, global = true)]
    tol_measure: Option<f64>,
    #[arg(long, global = true)]
    tol_gap: Option<f64>,
    #[arg(long, global = true)]
    tol_idempotent: Option<f64>,
    #[arg(long, global = true)]
    tol_radius_slack: Option<f64>,
}

impl TolArgs {
    fn resolve(&self) -> CliResult<Tolerances> {
        let mut t = Tolerances::default();
        let fields = [
            (self.tol_rank, &mut t.rank, "rank"),
            (self.tol_angle, &mut t.angle, "angle"),
            (self.tol_cluster, &mut t.cluster, "cluster"),
            (self.tol_boundary, &mut t.boundary, "boundary"),
            (self.tol_commute, &mut t.commute, "commute"),
            (self.tol_invariance, &mut t.invariance, "invariance"),
            (self.tol_subspace, &mut t.subspace, "subspace"),
            (self.tol_measure, &mut t.measure, "measure"),
            (self.tol_gap, &mut t.gap, "gap"),
            (self.tol_idempotent, &mut t.idempotent, "idempotent"),
            (self.tol_radius_slack, &mut t.radius_slack, "radius-slack"),
        ];
        for (given, slot, name) in fields {
            if let Some(v) = given {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(CliError::Usage(format!("--tol-{name} must be a non-negative number, got {v}")));
                }
                *slot = v;
            }
        }
        Ok(t)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a model tuple (and its oracle measure, when known) into a directory.
    Gen {
        /// Model spec as JSON (inline or a file), e.g. {"kind":"conjugated_diagonal","d":4,"n":2,"seed":7}.
        #[arg(long, conflicts_with = "explicit")]
        spec: Option<String>,
        /// Copy the given matrix files unchanged after validating them as a commuting tuple.
        #[arg(long, num_args = 1..)]
        explicit: Vec<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Joint Brown measure of a commuting tuple.
    #[command(alias = "joint")]
    Brown {
        inputs: Vec<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Also write the atoms as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Joint spectral decomposition: cluster points, multiplicities and frames.
    Decompose {
        inputs: Vec<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Spectral subspace P(B) of a region, with its Riesz idempotent on request.
    Subspace {
        inputs: Vec<PathBuf>,
        /// Region JSON (inline or a file).
        #[arg(long)]
        region: String,
        /// Include the materialized idempotent matrix.
        #[arg(long)]
        idempotent: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run verification suites and write a machine-readable report.
    Verify {
        /// Comma-separated suites, or "all".
        #[arg(long, default_value = "all")]
        suite: String,
        /// Comma-separated model families, or "all"; ignored for explicit inputs unless given.
        #[arg(long)]
        model: Option<String>,
        /// Seeds as "a..b" (inclusive) or a comma-separated list.
        #[arg(long, default_value = "1..10")]
        seeds: String,
        /// Verify an explicit tuple instead of (or besides) generated models.
        #[arg(long, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(long, default_value_t = 32)]
        max_dim: usize,
        #[arg(long, default_value_t = 8)]
        trials: usize,
        #[arg(long, default_value_t = 8)]
        cover_depth: u32,
        #[arg(long, default_value_t = 4)]
        grid_depth: u32,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Regularized log-potential Brown density on a grid (CSV + PPM heatmap).
    GridBrown {
        input: PathBuf,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        ny: Option<usize>,
        /// Half-width of a square window centred at 0; default adapts to the operator norm.
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        ppm: Option<PathBuf>,
    },
    /// Dyadic box cover of the preimage of an open set under addition or multiplication.
    Cover {
        /// Target region of C as JSON (inline or a file).
        #[arg(long)]
        target: String,
        #[arg(long, value_enum, default_value_t = MapArg::Add)]
        map: MapArg,
        /// Operator-norm bound for the second factor (multiplication only).
        #[arg(long, default_value_t = 1.0)]
        norm_bound: f64,
        #[arg(long, default_value_t = 6)]
        depth: u32,
        /// Enumerate level-0 boxes meeting [-domain, domain]^2 in each coordinate.
        #[arg(long, default_value_t = 2.0)]
        domain: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum MapArg {
    Add,
    Multiply,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Help and version are not errors; bad usage must not collide with exit 2.
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(exit::IO as u8),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let tol = cli.tol.resolve()?;
    match cli.command {
        Command::Gen { spec, explicit, out } => cmd_gen(spec.as_deref(), &explicit, &out, &tol),
        Command::Brown { inputs, out, csv } => cmd_brown(&inputs, out.as_deref(), csv.as_deref(), &tol),
        Command::Decompose { inputs, out } => {
            let dec = decompose(&inputs, &tol)?;
            io::emit_json(&dec.to_json(), out.as_deref())
        }
        Command::Subspace { inputs, region, idempotent, out } => {
            cmd_subspace(&inputs, &region, idempotent, out.as_deref(), &tol)
        }
        Command::Verify { suite, model, seeds, input, max_dim, trials, cover_depth, grid_depth, out } => {
            let opts = SuiteOptions { tol, trials, max_dim, cover_depth, grid_depth };
            cmd_verify(&suite, model.as_deref(), &seeds, &input, &opts, out.as_deref())
        }
        Command::GridBrown { input, nx, ny, radius, epsilon, csv, ppm } => {
            cmd_grid_brown(&input, nx, ny, radius, epsilon, &csv, ppm.as_deref())
        }
        Command::Cover { target, map, norm_bound, depth, domain, csv } => {
            cmd_cover(&target, map, norm_bound, depth, domain, csv.as_deref())
        }
    }
}

fn decompose(inputs: &[PathBuf], tol: &Tolerances) -> CliResult<JointDecomposition> {
    let tuple = io::read_tuple(inputs, tol.commute)?;
    Ok(JointDecomposition::compute_with(&tuple, tol)?)
}

fn cmd_gen(spec: Option<&str>, explicit: &[PathBuf], out: &Path, tol: &Tolerances) -> CliResult<()> {
    if !explicit.is_empty() {
        io::read_tuple(explicit, tol.commute)?;
        for (i, p) in explicit.iter().enumerate() {
            let bytes = std::fs::read(p).map_err(|e| CliError::io(p, e))?;
            io::write_bytes(&out.join(format!("T{i}.json")), &bytes)?;
        }
        println!("copied {} matrices to {}", explicit.len(), out.display());
        return Ok(());
    }
    let spec: ModelSpec = io::json_arg(spec.ok_or_else(|| CliError::Usage("gen needs --spec or --explicit".into()))?)?;
    let model = spec.generate()?;
    // Generated tuples must pass the same validation as loaded ones.
    let tuple = jointspec::CommutingTuple::with_tol(model.mats.clone(), tol.commute)?;
    for (i, m) in model.mats.iter().enumerate() {
        io::write_matrix(&out.join(format!("T{i}.json")), m)?;
    }
    for (i, m) in model.factors.iter().enumerate() {
        io::write_matrix(&out.join(format!("factor{i}.json")), m)?;
    }
    io::write_bytes(&out.join("spec.json"), io::to_json_string(&spec).as_bytes())?;
    if let Some(oracle) = &model.oracle {
        io::write_bytes(&out.join("oracle.json"), io::to_json_string(oracle).as_bytes())?;
    }
    println!(
        "wrote {} matrices of dimension {} to {} (commutator bound {:.3e}{})",
        model.mats.len(),
        tuple.dim(),
        out.display(),
        tuple.commutator_bound(),
        if model.oracle.is_some() { ", with oracle" } else { "" }
    );
    Ok(())
}

fn cmd_brown(inputs: &[PathBuf], out: Option<&Path>, csv: Option<&Path>, tol: &Tolerances) -> CliResult<()> {
    let dec = decompose(inputs, tol)?;
    let mu: AtomicMeasure = brown(&dec);
    if let Some(p) = csv {
        io::write_bytes(p, mu.to_csv().as_bytes())?;
    }
    io::emit_json(&mu, out)
}

#[derive(Serialize)]
struct SubspaceJson {
    d: usize,
    dim: usize,
    trace: f64,
    frame: MatrixJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    idempotent: Option<IdempotentOut>,
}

#[derive(Serialize)]
struct IdempotentOut {
    matrix: MatrixJson,
    cond: f64,
}

fn cmd_subspace(inputs: &[PathBuf], region: &str, idempotent: bool, out: Option<&Path>, tol: &Tolerances) -> CliResult<()> {
    let region: Region = io::json_arg(region)?;
    region.dim()?;
    let dec = decompose(inputs, tol)?;
    let p = dec.spectral_projection(&region)?;
    let idempotent = if idempotent {
        let m = dec.riesz_idempotent(&region)?.materialize()?;
        Some(IdempotentOut { matrix: MatrixJson::from_matrix(&m.matrix), cond: m.cond })
    } else {
        None
    };
    let trace = dec.spectral_trace(&region)?.value();
    let json = SubspaceJson { d: dec.dim(), dim: p.dim(), trace, frame: MatrixJson::from_matrix(p.frame()), idempotent };
    io::emit_json(&json, out)
}

fn parse_list<T: std::str::FromStr<Err = jointspec::Error> + Copy>(s: &str, all: &[T]) -> CliResult<Vec<T>> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("all") {
        return Ok(all.to_vec());
    }
    s.split(',').filter(|x| !x.trim().is_empty()).map(|x| x.parse::<T>().map_err(|e| CliError::Usage(e.to_string()))).collect()
}

fn parse_seeds(s: &str) -> CliResult<Vec<u64>> {
    let bad = || CliError::Usage(format!("cannot read seeds '{s}'"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if b < a {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

fn cmd_verify(
    suites: &str,
    models: Option<&str>,
    seeds: &str,
    inputs: &[PathBuf],
    opts: &SuiteOptions,
    out: Option<&Path>,
) -> CliResult<()> {
    let suites: Vec<Suite> = parse_list(suites, &Suite::ALL)?;
    let seeds = parse_seeds(seeds)?;
    let mut sources: Vec<Source> = match models {
        Some(m) => parse_list(m, &ModelKind::ALL)?.into_iter().map(Source::Model).collect(),
        None if inputs.is_empty() => ModelKind::ALL.into_iter().map(Source::Model).collect(),
        None => Vec::new(),
    };
    if !inputs.is_empty() {
        let tuple = io::read_tuple(inputs, opts.tol.commute)?;
        let name = inputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join("+");
        sources.push(Source::Tuple { name, tuple });
    }
    let report = suite::run(&suites, &sources, &seeds, opts)?;
    for run in &report.runs {
        let checks: usize = run.reports.iter().map(|r| r.checks.len()).sum();
        let failed: usize = run.reports.iter().map(|r| r.failures().count()).sum();
        println!(
            "{:<24} {:<20} seed {:<4} d={:<4} {:>4} checks  {}",
            run.suite.name(),
            run.source,
            run.seed,
            run.dim,
            checks,
            if failed == 0 { "PASS".to_string() } else { format!("FAIL ({failed})") }
        );
        for c in run.reports.iter().flat_map(|r| r.failures()) {
            println!("    {}: observed {:.3e}, tolerance {:.1e}", c.assertion, c.observed, c.tolerance);
        }
    }
    println!("{} checks, {} failures", report.checks, report.failures);
    if let Some(p) = out {
        io::write_bytes(p, io::to_json_string(&report).as_bytes())?;
    }
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Verification { failures: report.failures, checks: report.checks })
    }
}

fn cmd_grid_brown(
    input: &Path,
    nx: Option<usize>,
    ny: Option<usize>,
    radius: Option<f64>,
    epsilon: Option<f64>,
    csv: &Path,
    ppm: Option<&Path>,
) -> CliResult<()> {
    let t = io::read_matrix(input)?;
    let eps = epsilon.unwrap_or_else(|| potential::default_epsilon(&t));
    let mut spec = match radius {
        Some(r) => GridSpec::centered(r, potential::DEFAULT_CELLS, potential::DEFAULT_CELLS),
        None => GridSpec::default_for(&t, eps),
    };
    if let Some(n) = nx {
        spec.nx = n;
    }
    if let Some(n) = ny {
        spec.ny = n;
    }
    let g = potential::grid_brown(&t, &spec, eps)?;
    io::write_bytes(csv, g.to_csv().as_bytes())?;
    if let Some(p) = ppm {
        io::write_bytes(p, &g.to_ppm())?;
    }
    println!(
        "total mass {:.6} (leak {:.3e}) on {}x{} cells over [{}, {}] x [{}, {}], epsilon {:.3e}",
        g.total_mass, g.leak, spec.nx, spec.ny, spec.x_min, spec.x_max, spec.y_min, spec.y_max, eps
    );
    Ok(())
}

fn cmd_cover(target: &str, map: MapArg, norm_bound: f64, depth: u32, domain: f64, csv: Option<&Path>) -> CliResult<()> {
    let target: Region = io::json_arg(target)?;
    let map = match map {
        MapArg::Add => CoverMap::Add,
        MapArg::Multiply => CoverMap::Multiply { norm_bound },
    };
    let cover = dyadic_cover(&target, map, depth, domain)?;
    if let Some(p) = csv {
        io::write_bytes(p, cover.to_csv().as_bytes())?;
    }
    let report = verify_cover(&cover);
    println!(
        "{} boxes to depth {}{}; structural checks {}",
        cover.boxes.len(),
        depth,
        if cover.truncated { " (truncated by the visit budget)" } else { "" },
        if report.passed() { "pass" } else { "FAIL" }
    );
    let level_counts = (0..=depth).map(|l| cover.boxes.iter().filter(|b| b.level == l).count());
    for (l, n) in level_counts.enumerate().filter(|(_, n)| *n > 0) {
        println!("  level {l}: {n}");
    }
    if report.passed() {
        Ok(())
    } else {
        let failures = report.failures().count();
        Err(CliError::Verification { failures, checks: report.checks.len() })
    }
}
