//! Command-line front end: JSON problems in, JSON/CSV reports out.
//!
//! Exit codes: 0 success; 1 parse or dimension error; 2 operators
//! incompatible on M ∩ N; 3 `--expect` mismatch.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use opext::asymptotics::{self, BaseGeometry, TruncationFamily, ZRule};
use opext::kernel::{self, Mat, Tolerance};
use opext::subspace::Subspace;
use opext::{douglas, extension, halmos, star};

#[derive(Parser)]
#[command(name = "opext", about = "Simultaneous operator extension toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Expectation {
    Bounded,
    Unbounded,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Example31,
    RankOne,
    Adversarial,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaseArg {
    Graph,
    Orthogonal,
}

#[derive(Clone, Copy, ValueEnum)]
enum ZArg {
    Zero,
    E1,
    NormalizedY,
}

impl From<ZArg> for ZRule {
    fn from(z: ZArg) -> ZRule {
        match z {
            ZArg::Zero => ZRule::Zero,
            ZArg::E1 => ZRule::E1,
            ZArg::NormalizedY => ZRule::NormalizedY,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build the simultaneous extension C(A,B) on M, N.
    Extend {
        problem: PathBuf,
        /// Omit the C matrices from the emitted report.
        #[arg(long)]
        no_matrices: bool,
    },
    /// Print the boundedness / closability / closedness verdicts.
    Check {
        problem: PathBuf,
        #[arg(long, value_enum)]
        expect: Option<Expectation>,
    },
    /// Print the metric supremum kappa13 and its sandwich interval.
    Metric { problem: PathBuf },
    /// Emit the two-projections decomposition of (M, N).
    Halmos { problem: PathBuf },
    /// Solve T = S·X (members S, T) or B = X·A (members A, B).
    Douglas { problem: PathBuf },
    /// Construct the star-supremum of A and B, or report why none exists.
    StarSup { problem: PathBuf },
    /// Sweep a truncation family and emit the growth CSV plus a JSON summary.
    FamilyRun {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Decay exponent for the example31 family.
        #[arg(long)]
        alpha: Option<f64>,
        /// Base geometry for the adversarial family.
        #[arg(long, value_enum, default_value = "graph")]
        base: BaseArg,
        /// Comma-separated truncation levels, strictly increasing.
        #[arg(long, value_delimiter = ',', required = true)]
        ns: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
    /// Emit the closability probe curve for a family and a probe rule.
    Probe {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_enum, default_value = "graph")]
        base: BaseArg,
        #[arg(long, value_enum)]
        z: ZArg,
        #[arg(long, value_delimiter = ',', required = true)]
        ns: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Deserialize)]
struct SubspaceSpec {
    spanning: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct TolSpec {
    rank_rtol: Option<f64>,
    residual_atol: Option<f64>,
}

#[derive(Deserialize)]
struct ProblemFile {
    #[serde(rename = "A")]
    a: Option<Vec<Vec<f64>>>,
    #[serde(rename = "B")]
    b: Option<Vec<Vec<f64>>>,
    #[serde(rename = "M")]
    m: Option<SubspaceSpec>,
    #[serde(rename = "N")]
    n: Option<SubspaceSpec>,
    #[serde(rename = "S")]
    s: Option<Vec<Vec<f64>>>,
    #[serde(rename = "T")]
    t: Option<Vec<Vec<f64>>>,
    tol: Option<TolSpec>,
}

fn to_mat(rows: &[Vec<f64>], what: &str) -> anyhow::Result<Mat> {
    if rows.is_empty() {
        bail!("{what}: empty matrix");
    }
    let c = rows[0].len();
    if c == 0 || rows.iter().any(|r| r.len() != c) {
        bail!("{what}: ragged or zero-width rows");
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        bail!("{what}: non-finite entry");
    }
    Ok(Mat::from_fn(rows.len(), c, |i, j| rows[i][j]))
}

fn mat_to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

struct Problem {
    a: Option<Mat>,
    b: Option<Mat>,
    m: Option<Subspace>,
    n: Option<Subspace>,
    s: Option<Mat>,
    t: Option<Mat>,
    tol: Tolerance,
}

fn env_f64(key: &str) -> anyhow::Result<Option<f64>> {
    match std::env::var(key) {
        Ok(v) => {
            let x: f64 = v.parse().with_context(|| format!("{key} is not a number"))?;
            if !(x.is_finite() && x > 0.0) {
                bail!("{key} must be a positive finite number");
            }
            Ok(Some(x))
        }
        Err(_) => Ok(None),
    }
}

fn effective_tol(spec: Option<&TolSpec>) -> anyhow::Result<Tolerance> {
    let mut tol = Tolerance::default();
    if let Some(v) = env_f64("OPEXT_TOL_RTOL")? {
        tol.rank_rtol = v;
    }
    if let Some(v) = env_f64("OPEXT_TOL_ATOL")? {
        tol.residual_atol = v;
    }
    if let Some(s) = spec {
        if let Some(v) = s.rank_rtol {
            tol.rank_rtol = v;
        }
        if let Some(v) = s.residual_atol {
            tol.residual_atol = v;
        }
    }
    if !(tol.rank_rtol.is_finite() && tol.rank_rtol > 0.0)
        || !(tol.residual_atol.is_finite() && tol.residual_atol > 0.0)
    {
        bail!("tolerances must be positive finite numbers");
    }
    Ok(tol)
}

fn load_problem(path: &PathBuf) -> anyhow::Result<Problem> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let file: ProblemFile = serde_json::from_str(&text)
        .with_context(|| format!("cannot parse {}", path.display()))?;
    let tol = effective_tol(file.tol.as_ref())?;
    let spec_to_subspace = |s: &SubspaceSpec, what: &str| -> anyhow::Result<Subspace> {
        let m = to_mat(&s.spanning, what)?;
        Ok(Subspace::span_of(&m, &tol))
    };
    Ok(Problem {
        a: file.a.as_deref().map(|r| to_mat(r, "A")).transpose()?,
        b: file.b.as_deref().map(|r| to_mat(r, "B")).transpose()?,
        m: file.m.as_ref().map(|s| spec_to_subspace(s, "M")).transpose()?,
        n: file.n.as_ref().map(|s| spec_to_subspace(s, "N")).transpose()?,
        s: file.s.as_deref().map(|r| to_mat(r, "S")).transpose()?,
        t: file.t.as_deref().map(|r| to_mat(r, "T")).transpose()?,
        tol,
    })
}

fn need<T>(v: Option<T>, what: &str) -> anyhow::Result<T> {
    v.with_context(|| format!("problem file is missing member {what}"))
}

#[derive(Serialize)]
struct ExtendOut {
    compatible: bool,
    incompat_residual: f64,
    bounded: bool,
    bounded_margin: f64,
    closable: bool,
    closed: bool,
    extension_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    metric_sup: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_full: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_canonical: Option<Vec<Vec<f64>>>,
}

fn cmd_extend(problem: &PathBuf, no_matrices: bool) -> anyhow::Result<u8> {
    let p = load_problem(problem)?;
    let (a, b) = (need(p.a, "A")?, need(p.b, "B")?);
    let (m, n) = (need(p.m, "M")?, need(p.n, "N")?);
    let rep = extension::build(&a, &b, &m, &n, &p.tol)?;
    let out = ExtendOut {
        compatible: rep.compatible,
        incompat_residual: rep.incompat_residual,
        bounded: rep.bounded,
        bounded_margin: rep.bounded_margin,
        closable: rep.closable,
        closed: rep.closed,
        extension_norm: rep.extension_norm,
        metric_sup: rep.metric_sup,
        c_full: if no_matrices {
            None
        } else {
            rep.c_full.as_ref().map(mat_to_rows)
        },
        c_canonical: if no_matrices {
            None
        } else {
            rep.c_canonical.as_ref().map(mat_to_rows)
        },
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(if rep.compatible { 0 } else { 2 })
}

fn cmd_check(problem: &PathBuf, expect: Option<Expectation>) -> anyhow::Result<u8> {
    let p = load_problem(problem)?;
    let (a, b) = (need(p.a, "A")?, need(p.b, "B")?);
    let (m, n) = (need(p.m, "M")?, need(p.n, "N")?);
    let rep = extension::build(&a, &b, &m, &n, &p.tol)?;
    println!("compatible = {} (incompat_residual = {})", rep.compatible, rep.incompat_residual);
    if !rep.compatible {
        return Ok(2);
    }
    println!("bounded = {} (margin = {})", rep.bounded, rep.bounded_margin);
    println!("closable = {}", rep.closable);
    println!("closed = {}", rep.closed);
    println!("extension_norm = {}", rep.extension_norm);
    if let Some(expect) = expect {
        let want = matches!(expect, Expectation::Bounded);
        if rep.bounded != want {
            eprintln!(
                "expectation mismatch: wanted {}, got {}",
                if want { "bounded" } else { "unbounded" },
                if rep.bounded { "bounded" } else { "unbounded" }
            );
            return Ok(3);
        }
    }
    Ok(0)
}

fn cmd_metric(problem: &PathBuf) -> anyhow::Result<u8> {
    let p = load_problem(problem)?;
    let (a, b) = (need(p.a, "A")?, need(p.b, "B")?);
    let (m, n) = (need(p.m, "M")?, need(p.n, "N")?);
    let rep = extension::metric_sup(&a, &b, &m, &n, &p.tol)?;
    println!("kappa13 = {}", rep.kappa13);
    println!("kappa12 in [{}, {}]", rep.kappa12_bounds.0, rep.kappa12_bounds.1);
    Ok(0)
}

#[derive(Serialize)]
struct HalmosOut {
    corner_mn: usize,
    corner_mnp: usize,
    corner_mpn: usize,
    corner_mpnp: usize,
    m0: usize,
    m1: usize,
    s_spectrum: Vec<f64>,
    reconstruction_residual: f64,
    sum_closed: bool,
    closedness_margin: f64,
}

fn cmd_halmos(problem: &PathBuf) -> anyhow::Result<u8> {
    let p = load_problem(problem)?;
    let (m, n) = (need(p.m, "M")?, need(p.n, "N")?);
    let d = halmos::decompose(&m, &n, &p.tol)?;
    let (closed, margin) = halmos::closedness_test(&d, &p.tol);
    let out = HalmosOut {
        corner_mn: d.corner_mn.dim(),
        corner_mnp: d.corner_mnp.dim(),
        corner_mpn: d.corner_mpn.dim(),
        corner_mpnp: d.corner_mpnp.dim(),
        m0: d.m0.dim(),
        m1: d.m1.dim(),
        s_spectrum: (0..d.m0.dim()).map(|j| d.s[(j, j)]).collect(),
        reconstruction_residual: d.reconstruction_residual,
        sum_closed: closed,
        closedness_margin: margin,
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

#[derive(Serialize)]
struct DouglasOut {
    equation: String,
    solvable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate_min_eig: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x: Option<Vec<Vec<f64>>>,
}

fn cmd_douglas(problem: &PathBuf) -> anyhow::Result<u8> {
    let p = load_problem(problem)?;
    let out = if p.s.is_some() || p.t.is_some() {
        let (s, t) = (need(p.s, "S")?, need(p.t, "T")?);
        let sol = douglas::douglas_solve(&s, &t, &p.tol)?;
        DouglasOut {
            equation: "T = S X".into(),
            solvable: sol.solvable,
            lambda: sol.lambda,
            certificate_min_eig: sol.certificate_min_eig,
            x: sol.x.as_ref().map(mat_to_rows),
        }
    } else {
        let (a, b) = (need(p.a, "A")?, need(p.b, "B")?);
        let sol = douglas::dual_solve(&a, &b, &p.tol)?;
        let lambda = sol.x.as_ref().map(kernel::op_norm);
        DouglasOut {
            equation: "B = X A".into(),
            solvable: sol.solvable,
            lambda,
            certificate_min_eig: None,
            x: sol.x.as_ref().map(mat_to_rows),
        }
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

#[derive(Serialize)]
struct StarSupOut {
    exists: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<Vec<Vec<f64>>>,
}

fn cmd_star_sup(problem: &PathBuf) -> anyhow::Result<u8> {
    let p = load_problem(problem)?;
    let (a, b) = (need(p.a, "A")?, need(p.b, "B")?);
    let rep = star::star_supremum(&a, &b, &p.tol)?;
    let out = StarSupOut {
        exists: rep.exists,
        reason: rep.reason.map(|r| {
            match r {
                star::SupremumFailure::IncompatibleOnIntersection => "incompatible_on_intersection",
                star::SupremumFailure::AdjointMismatch => "adjoint_mismatch",
            }
            .to_string()
        }),
        c: rep.c.as_ref().map(mat_to_rows),
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

fn make_family(f: FamilyArg, alpha: Option<f64>, base: BaseArg, seed: u64) -> anyhow::Result<TruncationFamily> {
    Ok(match f {
        FamilyArg::Example31 => {
            let alpha = alpha.context("--alpha is required for example31")?;
            TruncationFamily::example31(alpha)?
        }
        FamilyArg::RankOne => TruncationFamily::rank_one(),
        FamilyArg::Adversarial => {
            let base = match base {
                BaseArg::Graph => BaseGeometry::Example31Graph,
                BaseArg::Orthogonal => BaseGeometry::OrthogonalPair,
            };
            TruncationFamily::adversarial(base, seed)?
        }
    })
}

fn cmd_family_run(
    f: FamilyArg,
    alpha: Option<f64>,
    base: BaseArg,
    ns: &[usize],
    seed: u64,
    csv_out: Option<&PathBuf>,
) -> anyhow::Result<u8> {
    let family = make_family(f, alpha, base, seed)?;
    let tol = effective_tol(None)?;
    let report = asymptotics::run(&family, ns, &tol)?;
    let csv = report.to_csv();
    match csv_out {
        Some(path) => std::fs::write(path, &csv)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{csv}"),
    }
    println!("{}", serde_json::to_string(&report.summary())?);
    Ok(0)
}

fn cmd_probe(
    f: FamilyArg,
    alpha: Option<f64>,
    base: BaseArg,
    z: ZArg,
    ns: &[usize],
    seed: u64,
) -> anyhow::Result<u8> {
    let family = make_family(f, alpha, base, seed)?;
    let tol = effective_tol(None)?;
    let (curve, flag) = asymptotics::closability_probe(&family, z.into(), ns, &tol)?;
    println!("n,probe_norm,probe_residual");
    for (n, (norm, residual)) in ns.iter().zip(&curve) {
        println!("{n},{norm},{residual}");
    }
    println!("{}", serde_json::to_string(&flag)?);
    Ok(0)
}

fn run() -> anyhow::Result<u8> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successes, not argument errors
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(0);
            }
            eprint!("{e}");
            return Ok(1);
        }
    };
    match &cli.command {
        Command::Extend { problem, no_matrices } => cmd_extend(problem, *no_matrices),
        Command::Check { problem, expect } => cmd_check(problem, *expect),
        Command::Metric { problem } => cmd_metric(problem),
        Command::Halmos { problem } => cmd_halmos(problem),
        Command::Douglas { problem } => cmd_douglas(problem),
        Command::StarSup { problem } => cmd_star_sup(problem),
        Command::FamilyRun { family, alpha, base, ns, seed, csv_out } => {
            cmd_family_run(*family, *alpha, *base, ns, *seed, csv_out.as_ref())
        }
        Command::Probe { family, alpha, base, z, ns, seed } => {
            cmd_probe(*family, *alpha, *base, *z, ns, *seed)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
