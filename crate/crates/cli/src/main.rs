//! `qslice`: rasters of the slice, center lists, self-checks and
//! single-point queries.
//!
//! Exit codes: 0 success, 1 IO or computation failure, 2 usage error,
//! 3 failed verification.

mod settings;
mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use qslice::discreteness::{bq_test, BqKind};
use qslice::elliptic::SlicePoint;
use qslice::scan::output::{centers_json, ppm_bytes, rgb_buffer, to_json};
use qslice::scan::{raster, RasterStats};

use settings::{parse_complex, parse_size, read_config_file, Effective, Failure, Overrides};

#[derive(Parser)]
#[command(name = "qslice", version, about = "Holonomy rasters of the square punctured torus slice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify every pixel of a window and write the image.
    Raster(RasterArgs),
    /// Locate Fuchsian centers in a window.
    Centers(CentersArgs),
    /// Run the self-check suites.
    Verify(VerifyArgs),
    /// Character and discreteness verdict at one point.
    TraceAt(TraceAtArgs),
    /// Print the version.
    Version,
}

#[derive(Args, Clone, Default)]
struct WindowArgs {
    /// Window center as `re,im` [default: the Fuchsian point]
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    center: Option<Complex64>,
    /// Window size as `WxH` [default: 90x90]
    #[arg(long, value_parser = parse_size)]
    size: Option<(f64, f64)>,
    /// Pixels across the window width [default: 400]
    #[arg(long)]
    res: Option<usize>,
    #[command(flatten)]
    tuning: TuningArgs,
    /// Seed threshold on the imaginary residual for the center search
    #[arg(long)]
    seed_threshold: Option<f64>,
    /// Worker threads [default: $QSLICE_WORKERS, else all cores]
    #[arg(long)]
    workers: Option<usize>,
    /// File of `key = value` lines; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
struct TuningArgs {
    /// Farey depth limit of the discreteness test
    #[arg(long)]
    max_depth: Option<usize>,
    /// Farey vertex budget of the discreteness test
    #[arg(long)]
    max_nodes: Option<usize>,
    /// Trace modulus that ends a growing branch (> 2)
    #[arg(long)]
    growth_bound: Option<f64>,
    /// Relative local tolerance of the ODE integrator
    #[arg(long)]
    rtol: Option<f64>,
    /// Absolute local tolerance of the ODE integrator
    #[arg(long)]
    atol: Option<f64>,
}

#[derive(Args)]
struct RasterArgs {
    #[command(flatten)]
    window: WindowArgs,
    /// PPM output path [default: raster.ppm]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional PNG copy of the image
    #[arg(long)]
    png: Option<PathBuf>,
    /// Stats JSON path [default: standard output]
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Optional centers JSON path
    #[arg(long)]
    centers: Option<PathBuf>,
}

#[derive(Args)]
struct CentersArgs {
    #[command(flatten)]
    window: WindowArgs,
    /// Centers JSON path [default: centers.json]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run only these suites (repeatable)
    #[arg(long, value_parser = PossibleValuesParser::new(verify::SUITES))]
    suite: Vec<String>,
    /// Coefficient of the Weierstrass function, for negative controls
    #[arg(long, hide = true, default_value_t = 0.5)]
    theta: f64,
}

#[derive(Args)]
struct TraceAtArgs {
    /// The point `re,im`
    #[arg(value_parser = parse_complex, allow_hyphen_values = true)]
    c: Complex64,
    #[command(flatten)]
    tuning: TuningArgs,
}

fn overrides(w: &WindowArgs) -> Result<Overrides, Failure> {
    let flags = Overrides {
        center: w.center,
        size: w.size,
        res: w.res,
        max_depth: w.tuning.max_depth,
        max_nodes: w.tuning.max_nodes,
        growth_bound: w.tuning.growth_bound,
        rtol: w.tuning.rtol,
        atol: w.tuning.atol,
        seed_threshold: w.seed_threshold,
        workers: w.workers,
        ..Default::default()
    };
    match &w.config {
        Some(path) => Ok(flags.over(read_config_file(path)?)),
        None => Ok(flags),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn print(text: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure::Runtime(format!("cannot write to standard output: {e}")))
}

#[derive(Serialize)]
struct StatsReport<'a> {
    config: &'a Effective,
    stats: &'a RasterStats,
}

fn cmd_raster(args: &RasterArgs) -> Result<(), Failure> {
    let mut o = overrides(&args.window)?;
    o = Overrides {
        out: args.out.clone(),
        png: args.png.clone(),
        stats: args.stats.clone(),
        centers: args.centers.clone(),
        ..Default::default()
    }
    .over(o);
    let (cfg, effective) = settings::raster_config(&o)?;
    let r = raster(&cfg)?;
    let tags = r.tags();
    let out = o.out.unwrap_or_else(|| PathBuf::from("raster.ppm"));
    write_file(&out, &ppm_bytes(r.cols(), r.rows(), &tags))?;
    if let Some(png) = &o.png {
        image::save_buffer(
            png,
            &rgb_buffer(&tags),
            r.cols() as u32,
            r.rows() as u32,
            image::ExtendedColorType::Rgb8,
        )
        .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", png.display())))?;
    }
    if let Some(path) = &o.centers {
        write_file(path, centers_json(&r.centers).as_bytes())?;
    }
    let report = to_json(&StatsReport {
        config: &effective,
        stats: &r.stats,
    });
    match &o.stats {
        Some(path) => write_file(path, report.as_bytes()),
        None => print(&report),
    }
}

fn cmd_centers(args: &CentersArgs) -> Result<(), Failure> {
    let o = overrides(&args.window)?;
    let out = args
        .out
        .clone()
        .or(o.centers.clone())
        .unwrap_or_else(|| PathBuf::from("centers.json"));
    let (cfg, _) = settings::raster_config(&o)?;
    let r = raster(&cfg)?;
    write_file(&out, centers_json(&r.centers).as_bytes())?;
    print(&format!("{}\n", r.centers.len()))
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let suites: Vec<&str> = if args.suite.is_empty() {
        verify::SUITES.to_vec()
    } else {
        verify::SUITES.iter().copied().filter(|s| args.suite.iter().any(|a| a == s)).collect()
    };
    let mut failing = Vec::new();
    let mut table = String::new();
    for suite in suites {
        let checks = verify::run(suite, args.theta);
        let pass = checks.iter().all(|c| c.pass);
        table.push_str(&format!("{suite:<14} {}\n", if pass { "PASS" } else { "FAIL" }));
        for c in checks {
            table.push_str(&format!(
                "  {:<40} {} {}\n",
                c.name,
                if c.pass { "ok  " } else { "FAIL" },
                c.detail
            ));
            if !c.pass {
                failing.push(format!("{suite}: {}", c.name));
            }
        }
    }
    print(&table)?;
    if failing.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verify(failing))
    }
}

#[derive(Serialize)]
struct WitnessReport {
    slope: String,
    trace: [f64; 2],
}

#[derive(Serialize)]
struct TraceReport {
    c: [f64; 2],
    traces: [[f64; 2]; 3],
    kappa: [f64; 2],
    puncture_trace: Option<[f64; 2]>,
    verdict: &'static str,
    depth: Option<usize>,
    witness: Option<WitnessReport>,
    note: Option<String>,
    error_estimate: f64,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn cmd_trace_at(args: &TraceAtArgs) -> Result<(), Failure> {
    let o = Overrides {
        max_depth: args.tuning.max_depth,
        max_nodes: args.tuning.max_nodes,
        growth_bound: args.tuning.growth_bound,
        rtol: args.tuning.rtol,
        atol: args.tuning.atol,
        ..Default::default()
    };
    settings::validate(&o)?;
    let cfg = qslice::scan::RasterConfig {
        bq: settings::bq_options(&o),
        integrator: settings::integrator_options(&o),
        ..Default::default()
    };
    let solver = cfg.solver()?;
    let r = solver.holonomy(SlicePoint::new(args.c))?;
    let t = r.character;
    let (verdict, depth, witness, note) = match bq_test(&t, &cfg.bq) {
        Ok(v) => (
            v.kind.as_str(),
            Some(v.depth),
            v.witness.map(|w| WitnessReport {
                slope: w.slope.to_string(),
                trace: pair(w.trace),
            }),
            None,
        ),
        Err(e) => (BqKind::Inconclusive.as_str(), None, None, Some(e.to_string())),
    };
    let report = TraceReport {
        c: pair(args.c),
        traces: t.as_array().map(pair),
        kappa: pair(t.kappa()),
        puncture_trace: r.puncture_trace.map(pair),
        verdict,
        depth,
        witness,
        note,
        error_estimate: r.error_estimate,
    };
    print(&to_json(&report))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Raster(a) => cmd_raster(a),
        Command::Centers(a) => cmd_centers(a),
        Command::Verify(a) => cmd_verify(a),
        Command::TraceAt(a) => cmd_trace_at(a),
        Command::Version => print(&format!("qslice {}\n", env!("CARGO_PKG_VERSION"))),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qslice: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
