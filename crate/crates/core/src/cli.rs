//! Command-line front end.
//!
//! Exit codes: 0 success, 2 invalid flags, 3 construction error,
//! 4 quadrature non-convergence, 5 verification gate failure.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::delaunay::{self, DelaunayKind, CLASSIFY_TOL};
use crate::report;
use crate::stability::{self, AnalyzeOptions};
use crate::surface::{RotationalCapillarySurface, DEFAULT_STEP};
use crate::verify::{self, Hooks, Suite};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONSTRUCTION: i32 = 3;
pub const EXIT_PRECISION: i32 = 4;
pub const EXIT_GATE: i32 = 5;

pub const THREADS_ENV: &str = "CAPSTAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "capstab", version, about = "Capillary hypersurfaces of revolution in the unit ball")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a Delaunay meridian and write it as CSV.
    #[command(allow_negative_numbers = true)]
    Meridian(MeridianArgs),
    /// Build a surface, assemble Q, run the checks and print the report.
    #[command(allow_negative_numbers = true)]
    Analyze(AnalyzeArgs),
    /// Analyze a grid of (H, F) values and print one CSV row per surface.
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
    /// Run the residual suites over the built-in examples.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct MeridianArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long = "H")]
    pub h: f64,
    #[arg(long = "F")]
    pub f: f64,
    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub step: f64,
    #[arg(long, default_value_t = 10.0)]
    pub length: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalysisFlags {
    #[arg(long, default_value_t = stability::DEFAULT_TOL_CENTROID)]
    pub tol_centroid: f64,
    /// Eigenvalue threshold, or `auto` for 1e-8 · ‖Q‖∞.
    #[arg(long, default_value = "auto", value_parser = parse_tol_eig)]
    pub tol_eig: TolEig,
    /// Axial center of the flat disk or spherical cap built for F = 0.
    #[arg(long)]
    pub center: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TolEig {
    Auto,
    Value(f64),
}

fn parse_tol_eig(s: &str) -> std::result::Result<TolEig, String> {
    if s == "auto" {
        return Ok(TolEig::Auto);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(TolEig::Value(v)),
        _ => Err(format!("expected `auto` or a nonnegative number, got `{s}`")),
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long = "H", required_unless_present = "closed")]
    pub h: Option<f64>,
    #[arg(long = "F", required_unless_present = "closed")]
    pub f: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub step: f64,
    /// Accepted for symmetry with `meridian`; segments are clipped at the sphere.
    #[arg(long, default_value_t = 10.0)]
    pub length: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub analysis: AnalysisFlags,
    /// Analyze a closed round sphere centered at the origin.
    #[arg(long)]
    pub closed: bool,
    #[arg(long, default_value_t = 0.5)]
    pub sphere_radius: f64,
    /// Grid levels for convergence orders.
    #[arg(long, default_value_t = verify::DEFAULT_LEVELS)]
    pub levels: usize,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// `start:stop:step`
    #[arg(long = "H-range", allow_hyphen_values = true)]
    pub h_range: String,
    /// `start:stop:step`
    #[arg(long = "F-range", allow_hyphen_values = true)]
    pub f_range: String,
    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub step: f64,
    #[arg(long, default_value_t = 10.0)]
    pub length: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub analysis: AnalysisFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    All,
    Conformal,
    Delaunay,
    Lemmas,
    Centroid,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::All => Suite::All,
            SuiteArg::Conformal => Suite::Conformal,
            SuiteArg::Delaunay => Suite::Delaunay,
            SuiteArg::Lemmas => Suite::Lemmas,
            SuiteArg::Centroid => Suite::Centroid,
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = verify::DEFAULT_LEVELS)]
    pub levels: usize,
    /// Relative error injected into the Robin coefficient (negative control).
    #[arg(long, hide = true, default_value_t = 0.0)]
    pub inject_q_error: f64,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
    Io(io::Error),
    Gate(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::Io(e)
    }
}

type CliResult = std::result::Result<(), Failure>;

fn exit_code(f: &Failure) -> i32 {
    match f {
        Failure::Usage(_) => EXIT_USAGE,
        Failure::Lib(Error::Precision(_)) => EXIT_PRECISION,
        Failure::Lib(_) | Failure::Io(_) => EXIT_CONSTRUCTION,
        Failure::Gate(_) => EXIT_GATE,
    }
}

fn check_common(n: usize, step: f64, length: f64) -> CliResult {
    if n < 2 {
        return Err(Failure::Usage(format!("--n must be at least 2, got {n}")));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Failure::Usage(format!("--step must be positive, got {step}")));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Failure::Usage(format!("--length must be positive, got {length}")));
    }
    Ok(())
}

fn check_analysis(a: &AnalysisFlags) -> CliResult {
    if !(a.tol_centroid >= 0.0 && a.tol_centroid.is_finite()) {
        return Err(Failure::Usage(format!("--tol-centroid must be nonnegative, got {}", a.tol_centroid)));
    }
    Ok(())
}

fn options(a: &AnalysisFlags, levels: usize) -> AnalyzeOptions {
    AnalyzeOptions {
        tol_centroid: a.tol_centroid,
        tol_eig: match a.tol_eig {
            TolEig::Auto => None,
            TolEig::Value(v) => Some(v),
        },
        levels,
    }
}

/// Surface for `(H, F)`: analytic disk or cap when `F = 0`, otherwise the
/// symmetric Delaunay segment.
pub fn surface_for(n: usize, h: f64, f: f64, step: f64, center: Option<f64>) -> Result<RotationalCapillarySurface> {
    match delaunay::classify(n, h, f, CLASSIFY_TOL) {
        DelaunayKind::Hyperplane => RotationalCapillarySurface::disk(n, center.unwrap_or(0.0), step),
        DelaunayKind::Sphere => match center {
            Some(c) => RotationalCapillarySurface::cap(n, h, c, step),
            None => Err(Error::Construction(
                "F = 0 with H != 0 is a sphere; pass --center to build a cap or use --closed".into(),
            )),
        },
        _ => RotationalCapillarySurface::delaunay(n, h, f, step),
    }
}

fn write_output(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> CliResult {
    match out {
        Some(p) => fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_meridian(a: &MeridianArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    check_common(a.n, a.step, a.length)?;
    let kind = delaunay::classify(a.n, a.h, a.f, CLASSIFY_TOL);
    if kind.is_analytic() {
        writeln!(stdout, "kind={kind}")?;
        let what = if kind == DelaunayKind::Hyperplane { "a flat disk" } else { "a spherical cap or round sphere" };
        writeln!(stdout, "analytic path: the meridian meets the axis; `analyze` builds {what}")?;
        return Ok(());
    }
    let init = delaunay::symmetric_start(a.n, a.h, a.f)?;
    let curve = delaunay::integrate(a.n, a.h, init, a.step, a.length)?;
    if curve.axis_touching {
        let last = curve.states.last().copied().unwrap_or(init);
        return Err(Error::AxisContact { s: last.s, x2: last.x2 }.into());
    }
    let summary = format!("kind={}\nforce_drift={}\n", curve.kind(), report::format_real(curve.force_drift()));
    match &a.out {
        Some(p) => {
            fs::write(p, curve.to_csv())?;
            stdout.write_all(summary.as_bytes())?;
        }
        None => {
            stdout.write_all(curve.to_csv().as_bytes())?;
            stderr.write_all(summary.as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_analyze(a: &AnalyzeArgs, stdout: &mut dyn Write) -> CliResult {
    check_common(a.n, a.step, a.length)?;
    check_analysis(&a.analysis)?;
    if a.levels == 0 {
        return Err(Failure::Usage("--levels must be at least 1".into()));
    }
    let surface = if a.closed {
        RotationalCapillarySurface::closed_sphere(a.n, a.sphere_radius, a.step)?
    } else {
        let (h, f) = (a.h.unwrap_or_default(), a.f.unwrap_or_default());
        surface_for(a.n, h, f, a.step, a.analysis.center)?
    };
    let report = stability::analyze(surface, &options(&a.analysis, a.levels))?;
    write_output(&a.out, &report::to_json(&report), stdout)
}

/// Values `start + i·step` up to `stop` for a `start:stop:step` range.
pub fn parse_range(s: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("range `{s}` is not of the form start:stop:step"));
    }
    let v: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("range `{s}`: `{p}` is not a number")))
        .collect::<std::result::Result<_, _>>()?;
    let (a, b, step) = (v[0], v[1], v[2]);
    if !(a.is_finite() && b.is_finite() && step.is_finite()) || step <= 0.0 || b < a {
        return Err(format!("range `{s}` needs finite start <= stop and step > 0"));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=count)
        .map(|i| {
            let x = a + i as f64 * step;
            if x.abs() < 1e-12 * step { 0.0 } else { x }
        })
        .collect())
}

fn sweep_point(a: &SweepArgs, opts: &AnalyzeOptions, h: f64, f: f64) -> Result<String> {
    let surface = surface_for(a.n, h, f, a.step, a.analysis.center)?;
    let r = stability::assess(&surface, opts)?;
    Ok(report::sweep_row(&surface, r.form.lambda_min(), r.trace, r.witness.centroid_norm, r.verdict.as_str()))
}

fn thread_setting() -> std::result::Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Failure::Usage(format!("{THREADS_ENV} must be a nonnegative integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

fn cmd_sweep(a: &SweepArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    check_common(a.n, a.step, a.length)?;
    check_analysis(&a.analysis)?;
    let hs = parse_range(&a.h_range).map_err(Failure::Usage)?;
    let fs_ = parse_range(&a.f_range).map_err(Failure::Usage)?;
    let points: Vec<(f64, f64)> = hs.iter().flat_map(|&h| fs_.iter().map(move |&f| (h, f))).collect();
    let opts = options(&a.analysis, 1);
    let eval = |&(h, f): &(f64, f64)| sweep_point(a, &opts, h, f);
    let results: Vec<Result<String>> = match thread_setting()? {
        Some(0) => points.iter().map(eval).collect(),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Failure::Usage(e.to_string()))?
            .install(|| points.par_iter().map(eval).collect()),
        None => points.par_iter().map(eval).collect(),
    };
    let mut csv = String::from(report::SWEEP_HEADER);
    csv.push('\n');
    let mut skipped = 0;
    for ((h, f), r) in points.iter().zip(results) {
        match r {
            Ok(row) => {
                csv.push_str(&row);
                csv.push('\n');
            }
            Err(e) => {
                skipped += 1;
                writeln!(stderr, "skip H={h} F={f}: {e}")?;
            }
        }
    }
    if skipped > 0 {
        writeln!(stderr, "warning: {skipped} of {} points skipped", points.len())?;
    }
    write_output(&a.out, &csv, stdout)
}

fn cmd_verify(a: &VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    if a.levels == 0 {
        return Err(Failure::Usage("--levels must be at least 1".into()));
    }
    let hooks = Hooks { q_scale: 1.0 + a.inject_q_error };
    let gates = verify::run_suite(a.suite.into(), a.levels, &hooks)?;
    writeln!(
        stdout,
        "{:<4} {:<10} {:<30} {:<18} {:>12} {:>8} {:>10}",
        "", "suite", "check", "subject", "residual", "order", "limit"
    )?;
    for g in &gates {
        writeln!(stdout, "{g}")?;
    }
    let failed: Vec<_> = gates.iter().filter(|g| !g.passed).collect();
    for g in &failed {
        writeln!(stderr, "gate failed: {} on {} (residual {:e}, limit {:e})", g.check, g.subject, g.residual, g.limit)?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Gate(failed.len()))
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Meridian(a) => cmd_meridian(a, stdout, stderr),
        Command::Analyze(a) => cmd_analyze(a, stdout),
        Command::Sweep(a) => cmd_sweep(a, stdout, stderr),
        Command::Verify(a) => cmd_verify(a, stdout, stderr),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            match &f {
                Failure::Usage(m) => {
                    let _ = writeln!(stderr, "error: {m}");
                }
                Failure::Lib(e) => {
                    let _ = writeln!(stderr, "error: {e}");
                }
                Failure::Io(e) => {
                    let _ = writeln!(stderr, "error: {e}");
                }
                Failure::Gate(k) => {
                    let _ = writeln!(stderr, "{k} verification gate(s) failed");
                }
            }
            exit_code(&f)
        }
    }
}
