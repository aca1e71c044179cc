//! `gabor-atlas`: membership checks, dual synthesis, duality verification and
//! frame-region scans from the command line.
//!
//! Exit status: 0 ok, 1 i/o or internal error, 2 parameter error,
//! 3 singular matrix, 4 failed verification. Errors print one line
//! `ERROR <code>: <detail>` on stderr.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use gabor_core::atlas::{support_param, AtlasOptions, GaborParams, LatticeRange, ObstructionDb, Param};
use gabor_core::dual::{det_scan_with, synthesize_dual_with, SynthesisOptions};
use gabor_core::duality::{default_tolerance, duality_residuals_with, ResidualGrid, ResidualOptions};
use gabor_core::io::{json_string, read_grid_csv, window_from_arg, write_det_scan_csv, write_grid_csv, write_scan_csv};
use gabor_core::membership;
use gabor_core::svg::render_atlas_svg;
use gabor_core::{classify, make_window, scan_region, Error, Execution, Window};

#[derive(Parser, Debug)]
#[command(name = "gabor-atlas", version, about = "Short-support dual Gabor windows and frame-region atlas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check membership of the window in V_{N,a}; prints a JSON report.
    Check(CheckArgs),
    /// Synthesize the dual on [-3a/2, 3a/2].
    Dual(DualArgs),
    /// Verify the duality conditions for a dual CSV or a fresh synthesis.
    Verify(VerifyArgs),
    /// Classify a lattice of (a, b) points; CSV (or SVG with --format svg).
    Scan(ScanArgs),
    /// Scan and render the atlas as SVG.
    AtlasPlot(ScanArgs),
}

#[derive(Args, Debug)]
struct WindowArgs {
    /// bspline:N=2, cospower:N=3, exp:N=2, gauss:N=2, rational_abs:N=2,
    /// rational_sq:N=2, box:c=1 or knots:FILE.csv
    #[arg(long)]
    window: String,
    /// Support length; required to disambiguate knot files, checked otherwise.
    #[arg(long = "N")]
    n: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Axioms,
    Prop41,
    Cor19,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    window: WindowArgs,
    /// Translation parameter; required for --method axioms.
    #[arg(long)]
    a: Option<String>,
    #[arg(long, value_enum, default_value = "axioms")]
    method: MethodArg,
    #[arg(long)]
    grid_step: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug)]
struct DualArgs {
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long)]
    a: String,
    /// Modulation parameter, decimal or p/q.
    #[arg(long)]
    b: String,
    #[arg(long)]
    grid_step: Option<f64>,
    /// Tolerance of the attached duality check.
    #[arg(long)]
    tol: Option<f64>,
    /// Synthesize even when b <= 2/(N+a).
    #[arg(long)]
    force: bool,
    /// Directory receiving dual.csv, det_scan.csv and summary.json;
    /// the summary goes to stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
    /// Dual window CSV (x,value); re-synthesized when absent.
    #[arg(long)]
    dual: Option<PathBuf>,
    #[arg(long)]
    grid_step: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[command(flatten)]
    window: WindowArgs,
    /// start:stop:step or a single value
    #[arg(long)]
    a: String,
    /// start:stop:step or a single value; parts may be p/q
    #[arg(long)]
    b: String,
    /// Re-verify class membership numerically at every a.
    #[arg(long)]
    strict: bool,
    /// Extra obstructions, CSV rows window,a,b,citation.
    #[arg(long)]
    obstructions: Option<PathBuf>,
    #[arg(long)]
    grid_step: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    detail: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Validation { .. } | Error::Parameter(_) | Error::ParameterOutOfRange { .. } => 2,
            Error::SingularMatrix { .. } => 3,
            Error::DualityNotVerified { .. } => 4,
            Error::Integrity(_) | Error::Io(_) => 1,
        };
        Failure {
            code,
            detail: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::from(Error::from(e))
    }
}

fn usage(detail: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        detail: detail.into(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let detail: Vec<&str> = msg
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
                .filter(|l| !l.is_empty())
                .collect();
            let detail = detail.join(" ");
            eprintln!("ERROR 2: {}", detail.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("ERROR {}: {}", f.code, f.detail.replace('\n', " "));
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Check(args) => check(args),
        Command::Dual(args) => dual(args),
        Command::Verify(args) => verify(args),
        Command::Scan(args) => {
            let fmt = expect_format(args.format, &[Format::Csv, Format::Svg], Format::Csv)?;
            scan(args, fmt)
        }
        Command::AtlasPlot(args) => {
            expect_format(args.format, &[Format::Svg], Format::Svg)?;
            scan(args, Format::Svg)
        }
    }
}

/// `GABOR_ATLAS_THREADS` caps the worker pool; 0 or unset means automatic.
fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("GABOR_ATLAS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| usage(format!("GABOR_ATLAS_THREADS = `{raw}` is not a non-negative integer")))?;
    #[cfg(feature = "parallel")]
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure {
                code: 1,
                detail: format!("thread pool: {e}"),
            })?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn expect_format(given: Option<Format>, allowed: &[Format], default: Format) -> CliResult<Format> {
    match given {
        None => Ok(default),
        Some(f) if allowed.contains(&f) => Ok(f),
        Some(f) => Err(usage(format!("--format {f:?} is not available for this command").to_lowercase())),
    }
}

fn load_window(args: &WindowArgs) -> CliResult<Window> {
    if let Some(n) = args.n {
        if !(n.is_finite() && n > 0.0) {
            return Err(usage(format!("--N {n} must be positive")));
        }
    }
    Ok(make_window(window_from_arg(&args.window, args.n)?)?)
}

fn param(flag: &str, raw: &str) -> CliResult<Param> {
    let p: Param = raw.parse().map_err(|e: Error| usage(format!("--{flag}: {e}")))?;
    if !(p.value > 0.0) {
        return Err(usage(format!("--{flag} = {raw} must be positive")));
    }
    Ok(p)
}

fn positive(flag: &str, v: Option<f64>) -> CliResult<Option<f64>> {
    match v {
        Some(x) if !(x.is_finite() && x > 0.0) => Err(usage(format!("--{flag} = {x} must be positive"))),
        _ => Ok(v),
    }
}

fn nonnegative(flag: &str, v: Option<f64>) -> CliResult<Option<f64>> {
    match v {
        Some(x) if !(x.is_finite() && x >= 0.0) => Err(usage(format!("--{flag} = {x} must be non-negative"))),
        _ => Ok(v),
    }
}

fn emit(output: Option<&Path>, text: &str) -> CliResult<()> {
    match output {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn check(args: CheckArgs) -> CliResult<()> {
    expect_format(args.format, &[Format::Json], Format::Json)?;
    let w = load_window(&args.window)?;
    let grid_step = positive("grid-step", args.grid_step)?;
    let tol = nonnegative("tol", args.tol)?.unwrap_or_else(|| membership::default_tol(&w));
    let report = match args.method {
        MethodArg::Axioms => {
            let raw = args.a.as_deref().ok_or_else(|| usage("--a is required for --method axioms"))?;
            let a = param("a", raw)?.value;
            let step = grid_step.unwrap_or_else(|| membership::default_grid_step(w.n(), a));
            membership::check_axioms(&w, a, step, tol)?
        }
        MethodArg::Prop41 | MethodArg::Cor19 => {
            let step = grid_step.unwrap_or_else(|| membership::default_derivative_step(w.n()));
            if args.method == MethodArg::Prop41 {
                membership::check_prop41(&w, step, tol)?
            } else {
                membership::check_cor19(&w, step, tol)?
            }
        }
    };
    emit(args.output.as_deref(), &json_string(&report.to_json()))
}

fn dual(args: DualArgs) -> CliResult<()> {
    expect_format(args.format, &[Format::Csv], Format::Csv)?;
    let w = load_window(&args.window)?;
    let a = param("a", &args.a)?.value;
    let b = param("b", &args.b)?.value;
    let grid_step = positive("grid-step", args.grid_step)?;
    let tol = nonnegative("tol", args.tol)?.unwrap_or_else(|| default_tolerance(b));
    let exec = Execution::default();
    let d = synthesize_dual_with(
        &w,
        a,
        b,
        SynthesisOptions {
            grid_step,
            force: args.force,
            exec,
        },
    )?;
    let report = duality_residuals_with(
        &w,
        &d.h,
        a,
        b,
        ResidualOptions {
            grid_step: d.grid_step,
            tolerance: tol,
            grid: ResidualGrid::Nodes,
            exec,
        },
    )?;
    let scan = det_scan_with(&w, a, b, d.grid_step, exec)?;
    let summary = json!({
        "window": w.spec().id(),
        "N": w.n(),
        "a": a,
        "b": b,
        "grid_step": d.grid_step,
        "support": [-d.support_radius(), d.support_radius()],
        "min_abs_det": d.min_abs_det,
        "det_argmin": d.det_argmin,
        "seam_jump": d.seam_jump,
        "seam_consistent": d.seam_consistent,
        "max_relative_solve_residual": d.max_relative_solve_residual,
        "out_of_range": d.out_of_range,
        "duality": report.to_json(),
    });
    match args.output {
        Some(dir) => {
            fs::create_dir_all(&dir)?;
            write_grid_csv(fs::File::create(dir.join("dual.csv"))?, &d.h)?;
            write_det_scan_csv(fs::File::create(dir.join("det_scan.csv"))?, &scan)?;
            fs::write(dir.join("summary.json"), json_string(&summary))?;
        }
        None => emit(None, &json_string(&summary))?,
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> CliResult<()> {
    expect_format(args.format, &[Format::Json], Format::Json)?;
    let w = load_window(&args.window)?;
    let a = param("a", &args.a)?.value;
    let b = param("b", &args.b)?.value;
    let grid_step = positive("grid-step", args.grid_step)?;
    let tol = nonnegative("tol", args.tol)?.unwrap_or_else(|| default_tolerance(b));
    let exec = Execution::default();
    let (h, step) = match &args.dual {
        Some(path) => {
            let h = read_grid_csv(path)?;
            let step = grid_step.unwrap_or(h.step());
            (h, step)
        }
        None => {
            let d = synthesize_dual_with(
                &w,
                a,
                b,
                SynthesisOptions {
                    grid_step,
                    force: false,
                    exec,
                },
            )?;
            let step = d.grid_step;
            (d.h, step)
        }
    };
    let report = duality_residuals_with(
        &w,
        &h,
        a,
        b,
        ResidualOptions {
            grid_step: step,
            tolerance: tol,
            grid: ResidualGrid::Nodes,
            exec,
        },
    )?;
    emit(args.output.as_deref(), &json_string(&report.to_json()))?;
    if !report.pass {
        return Err(Error::DualityNotVerified {
            max_residual: report.max_residual(),
            tolerance: tol,
        }
        .into());
    }
    Ok(())
}

fn scan(args: ScanArgs, fmt: Format) -> CliResult<()> {
    let w = load_window(&args.window)?;
    let a_range: LatticeRange = args.a.parse().map_err(|e: Error| usage(format!("--a: {e}")))?;
    let b_range: LatticeRange = args.b.parse().map_err(|e: Error| usage(format!("--b: {e}")))?;
    let mut obstructions = ObstructionDb::default();
    if let Some(path) = &args.obstructions {
        obstructions.extend_from_csv(path)?;
    }
    let opts = AtlasOptions {
        strict: args.strict,
        grid_step: positive("grid-step", args.grid_step)?,
        obstructions,
        exec: Execution::default(),
    };
    let points = if a_range.len() == 1 && b_range.len() == 1 {
        // single point: keep exact parameters all the way through
        let p = GaborParams::new(support_param(&w), a_range.params()[0], b_range.params()[0])?;
        vec![gabor_core::atlas::ScanPoint {
            a: p.a.value,
            b: p.b.value,
            classification: classify(&w, &p, &opts)?,
        }]
    } else {
        scan_region(&w, a_range, b_range, &opts)?
    };
    let text = match fmt {
        Format::Svg => render_atlas_svg(&points, w.n(), a_range.step.value, b_range.step.value),
        _ => {
            let mut buf = Vec::new();
            write_scan_csv(&mut buf, &points)?;
            String::from_utf8(buf).expect("CSV output is UTF-8")
        }
    };
    emit(args.output.as_deref(), &text)
}
