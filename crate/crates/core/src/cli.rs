//! Command-line surface.
//!
//! Every command writes one machine-readable artifact (to `--out`, or stdout)
//! and a short human summary to stderr. Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success, all checks pass |
//! | 1 | a verification check failed (named on stderr) |
//! | 2 | invalid input: usage, file format, dimensions, normalization |
//! | 3 | the moment functional is not positive |
//! | 4 | not enough moments for the requested level |
//! | 5 | the Jacobi sequence violates a Favard condition |

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, FormatError, Result};
use crate::fock::{
    build_fock, compare_moments, reconstruct_moments, roundtrip_report, verify_adjoint_relation,
};
use crate::jacobi::{decompose, detect_backend, verify_favard_conditions, JacobiSequence};
use crate::moments::{load_samples, CatalogMeasure, MomentFunctional, MomentSource};
use crate::scalar::{parse_rational, Backend, Rational, Scalar};

#[derive(Debug, Parser)]
#[command(
    name = "favard",
    version,
    about = "Multidimensional Jacobi sequences of moment functionals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Moments → Jacobi file (Gω_n, α_{j|n}) plus a verification report.
    Decompose(DecomposeArgs),
    /// Jacobi file → moment file of the vacuum state.
    Reconstruct(ReconstructArgs),
    /// Runs every verification suite on a measure or a Jacobi file.
    Verify(VerifyArgs),
    /// Moments → Jacobi sequence → Fock space → moments, compared word by word.
    Roundtrip(RoundtripArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    /// Arbitrary-precision rationals.
    #[value(alias = "rational")]
    Exact,
    /// 64-bit floats.
    Float,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Exact => Backend::Exact,
            BackendArg::Float => Backend::Float,
        }
    }
}

#[derive(Debug, Clone, Args)]
#[group(skip)]
pub struct MeasureSpec {
    /// Catalog measure: gaussian_product, uniform_box, exponential_product,
    /// rademacher_product, atoms, circle_uniform.
    #[arg(long, required_unless_present_any = ["moments", "samples"], conflicts_with_all = ["moments", "samples"])]
    pub measure: Option<String>,
    /// Moment file (JSON).
    #[arg(long, conflicts_with = "samples")]
    pub moments: Option<PathBuf>,
    /// Sample file (JSON: {"d", "points", "weights"?}).
    #[arg(long)]
    pub samples: Option<PathBuf>,
    /// Atom of `--measure atoms`, as "x1,x2,...:weight" with rational entries.
    #[arg(long = "atom", value_name = "POINT:WEIGHT")]
    pub atoms: Vec<String>,
    /// Dimension (required for catalog measures; checked against files).
    #[arg(long)]
    pub d: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Top level N.
    #[arg(long = "N", short = 'N')]
    pub top: usize,
    #[arg(long, value_enum, default_value = "exact")]
    pub backend: BackendArg,
    /// Float tolerance (rank decisions and identity checks).
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Output path (written atomically); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub measure: MeasureSpec,
    #[command(flatten)]
    pub common: Common,
    /// Also write the analysis report (JSON) here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReconstructArgs {
    /// Jacobi file to reconstruct from.
    #[arg(long)]
    pub jacobi: PathBuf,
    /// Backend; inferred from the file's scalars when absent.
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Highest moment degree to emit (default and maximum 2N+1).
    #[arg(long)]
    pub max_degree: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Jacobi file to check against the Favard conditions.
    #[arg(
        long,
        required_unless_present_any = ["measure", "moments", "samples"],
        conflicts_with_all = ["measure", "moments", "samples"]
    )]
    pub jacobi: Option<PathBuf>,
    #[arg(long, conflicts_with_all = ["moments", "samples"])]
    pub measure: Option<String>,
    #[arg(long, conflicts_with = "samples")]
    pub moments: Option<PathBuf>,
    #[arg(long)]
    pub samples: Option<PathBuf>,
    #[arg(long = "atom", value_name = "POINT:WEIGHT")]
    pub atoms: Vec<String>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Top level N (measure input only).
    #[arg(long = "N", short = 'N')]
    pub top: Option<usize>,
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RoundtripArgs {
    #[command(flatten)]
    pub measure: MeasureSpec,
    #[command(flatten)]
    pub common: Common,
    /// Check every word instead of one word per monomial.
    #[arg(long)]
    pub all_words: bool,
}

/// Parses arguments from the process and runs.
pub fn main() -> ExitCode {
    run(Cli::parse())
}

pub fn run(cli: Cli) -> ExitCode {
    let outcome = match cli.command {
        Command::Decompose(a) => match a.common.backend {
            BackendArg::Exact => cmd_decompose::<Rational>(&a),
            BackendArg::Float => cmd_decompose::<f64>(&a),
        },
        Command::Reconstruct(a) => cmd_reconstruct(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Roundtrip(a) => match a.common.backend {
            BackendArg::Exact => cmd_roundtrip::<Rational>(&a),
            BackendArg::Float => cmd_roundtrip::<f64>(&a),
        },
    };
    match outcome {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail(what)) => {
            eprintln!("FAIL: {what}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotPositive { .. } => 3,
        Error::InsufficientMoments { .. } => 4,
        Error::FavardViolation { .. } | Error::InconsistentAdjoint { .. } => 5,
        _ => 2,
    }
}

#[derive(Debug)]
enum Outcome {
    Pass,
    /// Name of the first failing check.
    Fail(String),
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Format(FormatError::Schema(msg.into()))
}

/// `"x1,x2,...:w"`.
pub fn parse_atom(s: &str) -> Result<(Vec<Rational>, Rational)> {
    let (point, weight) = s
        .rsplit_once(':')
        .ok_or_else(|| usage(format!("atom `{s}` must look like \"x1,x2:weight\"")))?;
    let point = point
        .split(',')
        .map(parse_rational)
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((point, parse_rational(weight)?))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[allow(clippy::too_many_arguments)]
fn load_functional<T: Scalar>(
    measure: Option<&str>,
    moments: Option<&Path>,
    samples: Option<&Path>,
    atoms: &[String],
    d: Option<usize>,
    max_degree: usize,
) -> Result<MomentFunctional<T>> {
    let check_d = |found: usize| match d {
        Some(d) if d != found => Err(Error::Dimension(format!(
            "--d {d} but the file has d = {found}"
        ))),
        _ => Ok(()),
    };
    if !atoms.is_empty() && measure != Some("atoms") {
        return Err(usage("--atom only applies to --measure atoms"));
    }
    if let Some(name) = measure {
        let atoms = atoms
            .iter()
            .map(|a| parse_atom(a))
            .collect::<Result<Vec<_>>>()?;
        let catalog = CatalogMeasure::parse(name, atoms)?;
        let d = match (d, &catalog) {
            (Some(d), _) => d,
            (None, CatalogMeasure::Atoms(a)) if !a.is_empty() => a[0].0.len(),
            (None, CatalogMeasure::CircleUniform) => 2,
            (None, _) => return Err(usage("--d is required for catalog measures")),
        };
        return MomentFunctional::from_catalog(&catalog, d, max_degree);
    }
    if let Some(path) = moments {
        let phi = MomentFunctional::<T>::from_file(path)?;
        check_d(phi.dim())?;
        phi.require_degree(max_degree)?;
        return Ok(phi);
    }
    if let Some(path) = samples {
        let (file_d, points, weights) = load_samples::<T>(&read(path)?)?;
        check_d(file_d)?;
        let n = points.len();
        let phi = MomentFunctional::from_samples(&points, weights.as_deref(), max_degree)?;
        return Ok(phi.with_source(MomentSource::Samples(n)));
    }
    Err(usage("one of --measure, --moments, --samples is required"))
}

fn spec_functional<T: Scalar>(
    spec: &MeasureSpec,
    max_degree: usize,
) -> Result<MomentFunctional<T>> {
    load_functional(
        spec.measure.as_deref(),
        spec.moments.as_deref(),
        spec.samples.as_deref(),
        &spec.atoms,
        spec.d,
        max_degree,
    )
}

fn check_tol(backend: Backend, tol: f64) -> Result<()> {
    if backend == Backend::Float && !(tol > 0.0 && tol.is_finite()) {
        return Err(usage("--tol must be positive for the float backend"));
    }
    Ok(())
}

/// Writes `text` to `path` via a sibling temporary file and a rename, or to
/// stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    let io = |p: &Path| {
        let p = p.to_path_buf();
        move |source| Error::Io { path: p, source }
    };
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(io(Path::new("<stdout>")))?;
            out.flush().map_err(io(Path::new("<stdout>")))
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io(dir))?;
            tmp.write_all(text.as_bytes()).map_err(io(path))?;
            tmp.as_file().sync_all().map_err(io(path))?;
            tmp.persist(path).map_err(|e| io(path)(e.error))?;
            Ok(())
        }
    }
}

fn pretty<S: Serialize>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn cmd_decompose<T: Scalar>(a: &DecomposeArgs) -> Result<Outcome> {
    check_tol(T::BACKEND, a.common.tol)?;
    let top = a.common.top;
    let phi = spec_functional::<T>(&a.measure, 2 * top + 1)?;
    let dec = decompose(&phi, top, a.common.tol)?;
    eprintln!(
        "decompose: {} d={} N={} backend={}",
        phi.source(),
        phi.dim(),
        top,
        T::BACKEND.name()
    );
    summarize(&dec.analysis);
    emit(a.common.out.as_deref(), &dec.jacobi.to_file_string())?;
    if let Some(path) = &a.report {
        emit(Some(path), &pretty(&dec.analysis))?;
    }
    Ok(match dec.analysis.first_failure() {
        None => Outcome::Pass,
        Some((name, n)) => Outcome::Fail(format!("{name} at level {n}")),
    })
}

fn summarize(analysis: &crate::jacobi::MeasureAnalysis) {
    eprintln!(
        "  ranks {:?}, termination level {}",
        analysis.gradation.ranks,
        analysis
            .gradation
            .termination_level
            .map_or("none".to_string(), |n| n.to_string())
    );
    for r in &analysis.reports {
        eprintln!("  {}", r.summary_line());
    }
    for r in &analysis.favard.checks {
        eprintln!("  favard.{}", r.summary_line());
    }
}

fn cmd_reconstruct(a: &ReconstructArgs) -> Result<Outcome> {
    let text = read(&a.jacobi)?;
    let backend = match a.backend {
        Some(b) => b.into(),
        None => detect_backend(&text)?,
    };
    match backend {
        Backend::Exact => reconstruct_as::<Rational>(a, &text),
        Backend::Float => reconstruct_as::<f64>(a, &text),
    }
}

fn reconstruct_as<T: Scalar>(a: &ReconstructArgs, text: &str) -> Result<Outcome> {
    check_tol(T::BACKEND, a.tol)?;
    let js = JacobiSequence::<T>::from_file_str(text)?;
    let (fock, ops) = build_fock(&js, a.tol)?;
    let max_degree = a.max_degree.unwrap_or(fock.max_word_len());
    let phi = reconstruct_moments(&fock, &ops, max_degree)?;
    let positivity = phi.check_state_positivity(max_degree / 2, a.tol)?;
    eprintln!(
        "reconstruct: d={} N={} backend={} → moments up to degree {max_degree}",
        js.dim(),
        js.top(),
        T::BACKEND.name()
    );
    eprintln!(
        "  reconstructed state positivity: {}",
        if positivity.passed { "pass" } else { "FAIL" }
    );
    emit(a.out.as_deref(), &phi.to_file_string())?;
    Ok(match positivity.first_failure() {
        None => Outcome::Pass,
        Some(n) => Outcome::Fail(format!(
            "positivity of the reconstructed state at degree {n}"
        )),
    })
}

fn cmd_verify(a: &VerifyArgs) -> Result<Outcome> {
    if let Some(path) = &a.jacobi {
        let text = read(path)?;
        let backend = match a.backend {
            Some(b) => b.into(),
            None => detect_backend(&text)?,
        };
        return match backend {
            Backend::Exact => verify_jacobi_file::<Rational>(a, &text),
            Backend::Float => verify_jacobi_file::<f64>(a, &text),
        };
    }
    match a.backend.map_or(Backend::Exact, Backend::from) {
        Backend::Exact => verify_measure::<Rational>(a),
        Backend::Float => verify_measure::<f64>(a),
    }
}

fn verify_jacobi_file<T: Scalar>(a: &VerifyArgs, text: &str) -> Result<Outcome> {
    check_tol(T::BACKEND, a.tol)?;
    let js = JacobiSequence::<T>::from_file_str(text)?;
    let favard = verify_favard_conditions(&js, None, a.tol);
    let fock = build_fock(&js, a.tol);
    let (adjoint, adjoint_error) = match &fock {
        Ok((space, ops)) => (Some(verify_adjoint_relation(space, ops, a.tol)), None),
        Err(e) => (None, Some(e.to_string())),
    };
    eprintln!(
        "verify: Jacobi file d={} N={} backend={}",
        js.dim(),
        js.top(),
        T::BACKEND.name()
    );
    for r in &favard.checks {
        eprintln!("  favard.{}", r.summary_line());
    }
    if let Some(r) = &adjoint {
        eprintln!("  {}", r.summary_line());
    }
    if let Some(e) = &adjoint_error {
        eprintln!("  fock: {e}");
    }
    let passed = favard.passed && adjoint.as_ref().is_some_and(|r| r.passed);
    let report = json!({
        "input": "jacobi",
        "passed": passed,
        "favard": favard,
        "fock_adjointness": adjoint,
        "fock_error": adjoint_error,
    });
    emit(a.out.as_deref(), &pretty(&report))?;
    if let Some((condition, level)) = favard.first_failure() {
        return Ok(Outcome::Fail(format!(
            "favard.{condition} at level {level}"
        )));
    }
    if let Some(e) = adjoint_error {
        return Ok(Outcome::Fail(e));
    }
    Ok(match adjoint.and_then(|r| r.first_failing_level()) {
        Some(n) => Outcome::Fail(format!("fock_adjointness at level {n}")),
        None => Outcome::Pass,
    })
}

fn verify_measure<T: Scalar>(a: &VerifyArgs) -> Result<Outcome> {
    check_tol(T::BACKEND, a.tol)?;
    let top = a
        .top
        .ok_or_else(|| usage("--N is required with a measure input"))?;
    let phi = load_functional::<T>(
        a.measure.as_deref(),
        a.moments.as_deref(),
        a.samples.as_deref(),
        &a.atoms,
        a.d,
        2 * top + 1,
    )?;
    let dec = decompose(&phi, top, a.tol)?;
    let (fock, ops) = build_fock(&dec.jacobi, a.tol)?;
    let adjoint = verify_adjoint_relation(&fock, &ops, a.tol);
    let roundtrip = compare_moments(
        &phi,
        &fock,
        &ops,
        phi.max_degree().min(fock.max_word_len()),
        a.tol,
        false,
    )?;
    eprintln!(
        "verify: {} d={} N={top} backend={}",
        phi.source(),
        phi.dim(),
        T::BACKEND.name()
    );
    summarize(&dec.analysis);
    eprintln!("  {}", adjoint.summary_line());
    eprintln!("  {}", roundtrip.check.summary_line());
    let passed = dec.analysis.passed && adjoint.passed && roundtrip.passed;
    let report = json!({
        "input": "measure",
        "passed": passed,
        "analysis": dec.analysis,
        "fock_adjointness": adjoint,
        "roundtrip": roundtrip,
    });
    emit(a.out.as_deref(), &pretty(&report))?;
    if let Some((name, n)) = dec.analysis.first_failure() {
        return Ok(Outcome::Fail(format!("{name} at level {n}")));
    }
    if let Some(n) = adjoint.first_failing_level() {
        return Ok(Outcome::Fail(format!("fock_adjointness at level {n}")));
    }
    Ok(match roundtrip.failing_word {
        Some(w) => Outcome::Fail(format!("roundtrip at word {w:?}")),
        None => Outcome::Pass,
    })
}

fn cmd_roundtrip<T: Scalar>(a: &RoundtripArgs) -> Result<Outcome> {
    check_tol(T::BACKEND, a.common.tol)?;
    let top = a.common.top;
    let phi = spec_functional::<T>(&a.measure, 2 * top + 1)?;
    let report = roundtrip_report(&phi, top, a.common.tol, a.all_words)?;
    eprintln!(
        "roundtrip: {} d={} N={top} backend={}: {} words up to length {}, max deviation {:e}",
        phi.source(),
        phi.dim(),
        T::BACKEND.name(),
        report.words_checked,
        report.max_word_len,
        report.max_deviation
    );
    let out: Value = json!({
        "source": phi.source().to_string(),
        "d": phi.dim(),
        "N": top,
        "backend": T::BACKEND.name(),
        "roundtrip": report,
    });
    emit(a.common.out.as_deref(), &pretty(&out))?;
    Ok(match report.failing_word {
        Some(w) => Outcome::Fail(format!("roundtrip at word {w:?}")),
        None => Outcome::Pass,
    })
}
