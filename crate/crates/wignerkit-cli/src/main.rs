//! Command-line front end for the wignerkit library.
//!
//! Subcommands read and write the library's JSON formats and print a
//! one-line summary to stderr; machine-readable JSON goes to `--out` when
//! given, otherwise to stdout. Exit codes: 0 success, 1 malformed input or
//! configuration, 2 mathematical rejection of well-formed input, 3 result
//! over tolerance. `WIGNERKIT_TOL` overrides default tolerances; an
//! explicit `--tol` beats both.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use wignerkit::io::{
    parse_json, ray_from_json, to_json_pretty, ComplexPair, ExtensionReportFile, FrameFile,
    GroupFile, LiftReportFile, ProbeTableFile, ResidualsFile, SquareSignFile, SymmetryOpFile,
};
use wignerkit::wigner::GAUGE_CONVENTION;
use wignerkit::{
    antiunitary_square_sign, bloch_point, coboundary_trivialization, cocycle_table, lift_family,
    make_probe_table, suites, tol, twisted_cocycle_check, verify_lift, wigner_lift,
    Error as LibError, Grading, Ray,
};

const EXIT_INPUT: u8 = 1;
const EXIT_REJECTED: u8 = 2;
const EXIT_TOLERANCE: u8 = 3;

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn tolerance(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_TOLERANCE,
            message: message.into(),
        }
    }
}

impl From<LibError> for Failure {
    fn from(e: LibError) -> Self {
        // Well-formed input the mathematics refuses is distinguished from
        // input that never made sense.
        let code = match &e {
            LibError::NotASymmetry { .. }
            | LibError::ElementLift { .. }
            | LibError::NotAHomomorphism { .. }
            | LibError::NotProjective { .. }
            | LibError::NotScalar { .. }
            | LibError::NonOrthonormalFrame { .. }
            | LibError::NotInSpan { .. } => EXIT_REJECTED,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

#[derive(Parser)]
#[command(
    name = "wignerkit",
    version,
    about = "Geometry of pure-state space and reconstruction of its symmetries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruct a unitary or antiunitary operator from a probe-table file
    Lift(LiftArgs),
    /// Check an operator file against a probe-table file
    Verify(VerifyArgs),
    /// Distance and transition probability between two state vectors
    Distance(DistanceArgs),
    /// Sphere coordinates of a ray relative to an orthonormal two-frame
    Bloch(BlochArgs),
    /// Write the probe table of an operator file
    #[command(name = "probe-table")]
    ProbeTableCmd(ProbeTableArgs),
    /// Sweep the law cos(distance) = 2*probability - 1 over random ray pairs
    #[command(name = "check-theorem1")]
    CheckTheorem1(CheckTheorem1Args),
    /// Check curvature identities and the finite-difference oracle
    #[command(name = "check-curvature")]
    CheckCurvature(CheckCurvatureArgs),
    /// Lift a group of probe tables and analyze its phase defects
    Extension(ExtensionArgs),
}

#[derive(Args)]
struct LiftArgs {
    /// Probe-table JSON file
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Write the lift report here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Certification tolerance (default: the table file's, else 1e-8)
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Operator JSON file (a lift report works too)
    #[arg(long, value_name = "PATH")]
    op: PathBuf,
    /// Probe-table JSON file
    #[arg(long, value_name = "PATH")]
    table: PathBuf,
    /// Extra random ray pairs for probability-preservation sampling
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Pass/fail tolerance (default 1e-8)
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct DistanceArgs {
    /// First vector: inline JSON `[[re,im],...]` or @path to a file
    #[arg(long)]
    v1: String,
    /// Second vector: inline JSON `[[re,im],...]` or @path to a file
    #[arg(long)]
    v2: String,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BlochArgs {
    /// Frame JSON file: { "e1": [[re,im],...], "e2": [...] }
    #[arg(long, value_name = "PATH")]
    frame: PathBuf,
    /// Ray JSON file: a bare vector `[[re,im],...]`
    #[arg(long, value_name = "PATH")]
    ray: PathBuf,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProbeTableArgs {
    /// Operator JSON file
    #[arg(long, value_name = "PATH")]
    op: PathBuf,
    /// Write the probe table here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Tolerance stored in the emitted table (default 1e-8)
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct CheckTheorem1Args {
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest acceptable deviation (default 1e-12)
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckCurvatureArgs {
    #[arg(long)]
    dim: usize,
    /// Finite-difference step for the oracle
    #[arg(long, default_value_t = tol::FD_STEP)]
    step: f64,
    /// Random frames for the closed identities
    #[arg(long, default_value_t = 200)]
    frames: usize,
    /// Random tangent triples for the oracle comparison
    #[arg(long, default_value_t = 25)]
    triples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExtensionArgs {
    /// Group JSON file with one probe table per element
    #[arg(long, value_name = "PATH")]
    group: PathBuf,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Circle-grid points per free generator in the trivialization search
    #[arg(long, default_value_t = 10_000)]
    resolution: usize,
    /// Largest acceptable twisted-identity residual (default 1e-8)
    #[arg(long)]
    tol: Option<f64>,
}

fn env_tolerance() -> Result<Option<f64>, Failure> {
    match std::env::var("WIGNERKIT_TOL") {
        Ok(s) if !s.trim().is_empty() => s
            .trim()
            .parse::<f64>()
            .map(Some)
            .map_err(|_| Failure::input(format!("WIGNERKIT_TOL is not a number: {s:?}"))),
        _ => Ok(None),
    }
}

/// Explicit flag, else the WIGNERKIT_TOL environment override, else the
/// command's default; validated positive and finite.
fn resolve_tolerance(flag: Option<f64>, fallback: f64) -> Result<f64, Failure> {
    let t = match flag {
        Some(t) => t,
        None => env_tolerance()?.unwrap_or(fallback),
    };
    if t > 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err(Failure::input(format!(
            "tolerance must be positive and finite, got {t}"
        )))
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

/// JSON to the output file when given, else to stdout; the summary always
/// goes to stderr so stdout stays machine-readable.
fn emit(out: Option<&PathBuf>, json: &str, summary: &str) -> CmdResult {
    match out {
        Some(path) => fs::write(path, json)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{json}"),
    }
    eprintln!("{summary}");
    Ok(())
}

fn require_nonzero(name: &str, value: usize) -> Result<(), Failure> {
    if value == 0 {
        return Err(Failure::input(format!("--{name} must be at least 1")));
    }
    Ok(())
}

fn run_lift(a: LiftArgs) -> CmdResult {
    let text = read_file(&a.input)?;
    let mut file: ProbeTableFile = parse_json(&text, "probe table")?;
    let tolerance = resolve_tolerance(a.tol, file.tolerance.unwrap_or(tol::SYM))?;
    if file.dim == 1 {
        // A single ray admits only the trivial ray map; any operator phase
        // induces it, so the lift is the identity by convention.
        let report = LiftReportFile {
            dim: 1,
            grading: Grading::Unitary,
            matrix: vec![vec![[1.0, 0.0]]],
            residuals: ResidualsFile {
                probe_max: 0.0,
                orthonormality: 0.0,
                alpha_consistency: 0.0,
                max: 0.0,
            },
            tolerance,
            accepted: true,
            gauge: GAUGE_CONVENTION.to_string(),
            warnings: vec![
                "dimension 1 has a single ray; the lift defaults to the identity".to_string(),
            ],
        };
        return emit(
            a.out.as_ref(),
            &to_json_pretty(&report),
            "accepted grading=unitary max_residual=0 (dimension 1, identity by convention)",
        );
    }
    file.tolerance = Some(tolerance);
    let table = file.to_table()?;
    let report = wigner_lift(&table)?;
    let json = to_json_pretty(&LiftReportFile::from_report(&report, vec![]));
    emit(
        a.out.as_ref(),
        &json,
        &format!(
            "accepted grading={} max_residual={:.3e} tolerance={:.3e}",
            report.grading(),
            report.residuals().max(),
            report.tolerance()
        ),
    )
}

#[derive(Serialize, Deserialize)]
struct VerifySummaryFile {
    dim: usize,
    probe_max: f64,
    probability_deviation: f64,
    samples: usize,
    seed: u64,
    tolerance: f64,
    passed: bool,
}

fn run_verify(a: VerifyArgs) -> CmdResult {
    let op = parse_json::<SymmetryOpFile>(&read_file(&a.op)?, "operator")?.to_op()?;
    let table = parse_json::<ProbeTableFile>(&read_file(&a.table)?, "probe table")?.to_table()?;
    let tolerance = resolve_tolerance(a.tol, tol::SYM)?;
    let report = verify_lift(&op, &table, a.samples, a.seed)?;
    let passed = report.probe_max <= tolerance && report.probability_deviation <= tolerance;
    let json = to_json_pretty(&VerifySummaryFile {
        dim: op.dim(),
        probe_max: report.probe_max,
        probability_deviation: report.probability_deviation,
        samples: a.samples,
        seed: a.seed,
        tolerance,
        passed,
    });
    emit(
        a.out.as_ref(),
        &json,
        &format!(
            "verify probe_max={:.3e} probability_deviation={:.3e} tolerance={:.3e} passed={}",
            report.probe_max, report.probability_deviation, tolerance, passed
        ),
    )?;
    if passed {
        Ok(())
    } else {
        Err(Failure::tolerance(format!(
            "operator misses the table: probe_max={:.3e}, probability_deviation={:.3e}, tolerance={:.3e}",
            report.probe_max, report.probability_deviation, tolerance
        )))
    }
}

fn vector_arg(arg: &str, what: &str) -> Result<Ray, Failure> {
    let text = match arg.strip_prefix('@') {
        Some(path) => read_file(Path::new(path))?,
        None => arg.to_string(),
    };
    Ok(ray_from_json(&text, what)?)
}

#[derive(Serialize, Deserialize)]
struct DistanceFile {
    dim: usize,
    distance: f64,
    cos_distance: f64,
    transition_probability: f64,
}

fn run_distance(a: DistanceArgs) -> CmdResult {
    let l1 = vector_arg(&a.v1, "v1")?;
    let l2 = vector_arg(&a.v2, "v2")?;
    let d = l1.fs_distance(&l2)?;
    let p = l1.transition_probability(&l2)?;
    let json = to_json_pretty(&DistanceFile {
        dim: l1.dim(),
        distance: d,
        cos_distance: d.cos(),
        transition_probability: p,
    });
    emit(
        a.out.as_ref(),
        &json,
        &format!("distance={d:.17} transition_probability={p:.17}"),
    )
}

#[derive(Serialize, Deserialize)]
struct BlochFile {
    x: f64,
    z: ComplexPair,
    sphere_residual: f64,
}

fn run_bloch(a: BlochArgs) -> CmdResult {
    let frame: FrameFile = parse_json(&read_file(&a.frame)?, "frame")?;
    let (e1, e2) = frame.to_vectors()?;
    let l = ray_from_json(&read_file(&a.ray)?, "ray")?;
    let bp = bloch_point(&e1, &e2, &l)?;
    let json = to_json_pretty(&BlochFile {
        x: bp.x,
        z: [bp.z.re, bp.z.im],
        sphere_residual: bp.sphere_residual(),
    });
    emit(
        a.out.as_ref(),
        &json,
        &format!("x={:.17} z=({:.17}, {:.17})", bp.x, bp.z.re, bp.z.im),
    )
}

fn run_probe_table(a: ProbeTableArgs) -> CmdResult {
    let op = parse_json::<SymmetryOpFile>(&read_file(&a.op)?, "operator")?.to_op()?;
    let tolerance = resolve_tolerance(a.tol, tol::SYM)?;
    let table = make_probe_table(&op)?;
    let mut file = ProbeTableFile::from_table(&table);
    file.tolerance = Some(tolerance);
    emit(
        a.out.as_ref(),
        &to_json_pretty(&file),
        &format!("probe table dim={} tolerance={tolerance:.3e}", table.dim()),
    )
}

#[derive(Serialize, Deserialize)]
struct TheoremCheckFile {
    dim: usize,
    samples: usize,
    seed: u64,
    max_deviation: f64,
    tolerance: f64,
    passed: bool,
}

fn run_check_theorem1(a: CheckTheorem1Args) -> CmdResult {
    if a.dim < 2 {
        return Err(Failure::input("--dim must be at least 2"));
    }
    require_nonzero("samples", a.samples)?;
    let tolerance = resolve_tolerance(a.tol, 1e-12)?;
    let max_deviation = suites::distance_probability_sweep(a.dim, a.samples, a.seed)?;
    let passed = max_deviation <= tolerance;
    let json = to_json_pretty(&TheoremCheckFile {
        dim: a.dim,
        samples: a.samples,
        seed: a.seed,
        max_deviation,
        tolerance,
        passed,
    });
    emit(
        a.out.as_ref(),
        &json,
        &format!(
            "max |cos(d) - (2p-1)| = {max_deviation:.3e} over {} pairs (dim {}), tolerance {tolerance:.3e}, passed={passed}",
            a.samples, a.dim
        ),
    )?;
    if passed {
        Ok(())
    } else {
        Err(Failure::tolerance(format!(
            "deviation {max_deviation:.3e} exceeds tolerance {tolerance:.3e}"
        )))
    }
}

#[derive(Serialize, Deserialize)]
struct CurvatureCheckFile {
    dim: usize,
    frames: usize,
    triples: usize,
    step: f64,
    seed: u64,
    max_xi_deviation: f64,
    max_eta_deviation: Option<f64>,
    oracle_gap: f64,
    closed_tolerance: f64,
    oracle_tolerance: f64,
    passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    notices: Vec<String>,
}

fn run_check_curvature(a: CheckCurvatureArgs) -> CmdResult {
    if a.dim < 2 {
        return Err(Failure::input("--dim must be at least 2"));
    }
    require_nonzero("frames", a.frames)?;
    require_nonzero("triples", a.triples)?;
    let (step_min, step_max) = tol::FD_STEP_RANGE;
    if !(a.step >= step_min && a.step <= step_max) {
        return Err(Failure::input(format!(
            "--step must lie in [{step_min:e}, {step_max:e}], got {}",
            a.step
        )));
    }
    let closed_tolerance = 1e-12;
    let oracle_tolerance = tol::FD_MATCH;
    let identities = suites::curvature_identity_sweep(a.dim, a.frames, a.seed)?;
    let oracle_gap = suites::curvature_oracle_sweep(a.dim, a.triples, a.seed, a.step)?;
    let mut notices = Vec::new();
    if a.dim == 2 {
        notices.push(
            "dimension 2 has no second direction complex-orthogonal to xi; that identity is skipped"
                .to_string(),
        );
    }
    let eta_ok = identities
        .max_eta_deviation
        .is_none_or(|d| d <= closed_tolerance);
    let passed =
        identities.max_xi_deviation <= closed_tolerance && eta_ok && oracle_gap <= oracle_tolerance;
    let json = to_json_pretty(&CurvatureCheckFile {
        dim: a.dim,
        frames: a.frames,
        triples: a.triples,
        step: a.step,
        seed: a.seed,
        max_xi_deviation: identities.max_xi_deviation,
        max_eta_deviation: identities.max_eta_deviation,
        oracle_gap,
        closed_tolerance,
        oracle_tolerance,
        passed,
        notices: notices.clone(),
    });
    let eta_text = match identities.max_eta_deviation {
        Some(d) => format!("{d:.3e}"),
        None => "skipped".to_string(),
    };
    emit(
        a.out.as_ref(),
        &json,
        &format!(
            "curvature identities: xi {:.3e}, eta {eta_text}, oracle gap {oracle_gap:.3e} at step {:.1e}, passed={passed}",
            identities.max_xi_deviation, a.step
        ),
    )?;
    for n in &notices {
        eprintln!("note: {n}");
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::tolerance(format!(
            "curvature checks exceed tolerances (closed {closed_tolerance:.1e}, oracle {oracle_tolerance:.1e})"
        )))
    }
}

fn run_extension(a: ExtensionArgs) -> CmdResult {
    if a.resolution < 2 {
        return Err(Failure::input("--resolution must be at least 2"));
    }
    let file: GroupFile = parse_json(&read_file(&a.group)?, "group")?;
    let (group, tables) = file.to_parts()?;
    let tolerance = resolve_tolerance(a.tol, tol::SYM)?;
    let lifts = lift_family(&group, &tables)?;
    let cocycle = cocycle_table(&group, &lifts)?;
    let residual = twisted_cocycle_check(&cocycle, &group);
    let mut square_signs = Vec::new();
    for (g, l) in lifts.iter().enumerate() {
        if l.grading().is_antiunitary() {
            if let Ok(sign) = antiunitary_square_sign(l) {
                square_signs.push(SquareSignFile { element: g, sign });
            }
        }
    }
    let trivialization = coboundary_trivialization(&cocycle, &group, a.resolution);
    let trivializable = trivialization.is_some();
    let gradings: Vec<u8> = cocycle.grading().iter().map(|g| g.parity()).collect();
    let report = ExtensionReportFile::new(
        &cocycle,
        residual,
        square_signs,
        a.resolution,
        trivialization,
    );
    emit(
        a.out.as_ref(),
        &to_json_pretty(&report),
        &format!(
            "order={} gradings={gradings:?} twisted_residual={residual:.3e} trivializable={trivializable}",
            group.order()
        ),
    )?;
    if residual <= tolerance {
        Ok(())
    } else {
        Err(Failure::tolerance(format!(
            "twisted-identity residual {residual:.3e} exceeds tolerance {tolerance:.3e}"
        )))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_INPUT)
            };
        }
    };
    let result = match cli.command {
        Command::Lift(a) => run_lift(a),
        Command::Verify(a) => run_verify(a),
        Command::Distance(a) => run_distance(a),
        Command::Bloch(a) => run_bloch(a),
        Command::ProbeTableCmd(a) => run_probe_table(a),
        Command::CheckTheorem1(a) => run_check_theorem1(a),
        Command::CheckCurvature(a) => run_check_curvature(a),
        Command::Extension(a) => run_extension(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
