//! `tqs`: evaluate the torus quasi-state of a field, or run property
//! batteries.
//!
//! Exit status: 0 success, 2 discrepancy over tolerance or battery failures,
//! 3 topology error, 4 input error.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use torus_quasistate::generate::TrigPolynomial;
use torus_quasistate::harness::{self, Battery, BatteryConfig};
use torus_quasistate::quasistate::{self, Options, Sampling, DEFAULT_TOLERANCE};
use torus_quasistate::{json, Error, FieldSource, Mode, ReebGraph, TorusField};

const MAX_GEN_DEGREE: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RunMode {
    Reeb,
    Aarnes,
    Both,
    Batteries,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "tqs", version, about = "Quasi-state of PL fields on the flat torus")]
struct Args {
    /// Grid resolution (n × n vertices, n ≥ 8).
    #[arg(long, default_value_t = 128)]
    n: usize,
    /// Field as an expression in p, q (e.g. "sin(2*pi*q)").
    #[arg(long, group = "input")]
    expr: Option<String>,
    /// Field as a TQS1 raster file.
    #[arg(long, group = "input")]
    raster: Option<PathBuf>,
    /// Field as a random trigonometric polynomial with this seed.
    #[arg(long, group = "input")]
    gen_seed: Option<u64>,
    #[arg(long, default_value_t = 2)]
    gen_degree: u32,
    /// Drop the constant term of the generated polynomial.
    #[arg(long)]
    zero_mean: bool,
    #[arg(long, value_enum, default_value_t = RunMode::Both)]
    mode: RunMode,
    /// Battery to run in batteries mode, or "all".
    #[arg(long, default_value = "all")]
    battery: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    count: usize,
    /// Minimum b(t) samples per interval between critical values.
    #[arg(long, default_value_t = 8)]
    t_refine: usize,
    #[arg(long)]
    tol: Option<f64>,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Also write the Reeb graph with its decomposition here.
    #[arg(long)]
    reeb_json: Option<PathBuf>,
}

enum Failure {
    Input(String),
    Topology(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Topology(_)
            | Error::EssentialLoop
            | Error::NotOnBoundary
            | Error::NotDisjoint
            | Error::IrregularLevel(_)
            | Error::BreaksTriangulation => Failure::Topology(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_field(args: &Args) -> Result<(TorusField, Option<u64>), Failure> {
    if let Some(src) = &args.expr {
        return Ok((TorusField::build(args.n, FieldSource::Expr(src))?, None));
    }
    if let Some(path) = &args.raster {
        let file = File::open(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
        let field = TorusField::read_raster(BufReader::new(file))?;
        if field.grid().n() != args.n {
            return Err(Error::GridMismatch { expected: args.n, actual: field.grid().n() }.into());
        }
        return Ok((field, None));
    }
    if let Some(seed) = args.gen_seed {
        if args.gen_degree > MAX_GEN_DEGREE {
            return Err(input(format!("--gen-degree {} exceeds {MAX_GEN_DEGREE}", args.gen_degree)));
        }
        let poly = TrigPolynomial::random(seed, args.gen_degree, args.zero_mean);
        return Ok((poly.field(args.n)?, Some(seed)));
    }
    Err(input("one of --expr, --raster, --gen-seed is required"))
}

fn run_batteries(args: &Args, tol: f64) -> Result<bool, Failure> {
    if args.format != Format::Json {
        return Err(input("batteries only write JSON"));
    }
    let batteries: Vec<Battery> = if args.battery == "all" {
        Battery::ALL.to_vec()
    } else {
        vec![args.battery.parse()?]
    };
    let mut cfg = BatteryConfig::new(args.n, args.seed, args.count);
    cfg.tolerance = tol;
    let mut reports = Vec::new();
    for b in batteries {
        let report = if b == Battery::Annulus && args.battery == "all" {
            harness::annulus_table(torus_quasistate::TorusGrid::new(args.n)?)?
        } else {
            harness::run_battery(b, &cfg)?
        };
        eprintln!("{}: {} cases, {} failures", b, report.cases, report.failures.len());
        reports.push(report);
    }
    let ok = reports.iter().all(|r| r.passed());
    let mut out = sink(&args.out)?;
    if reports.len() == 1 {
        json::to_writer(&mut out, &reports[0])?;
    } else {
        json::to_writer(&mut out, &reports)?;
    }
    writeln!(out)?;
    out.flush()?;
    Ok(ok)
}

fn run(args: &Args) -> Result<bool, Failure> {
    if args.n < 8 {
        return Err(Error::Resolution(args.n).into());
    }
    if args.t_refine < 1 {
        return Err(input("--t-refine must be at least 1"));
    }
    let tol = args.tol.unwrap_or(DEFAULT_TOLERANCE);
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(input("--tol must be a non-negative number"));
    }
    if args.mode == RunMode::Batteries {
        return run_batteries(args, tol);
    }
    let (field, seed) = load_field(args)?;
    let mode = match args.mode {
        RunMode::Reeb => Mode::Reeb,
        RunMode::Aarnes => Mode::Aarnes,
        _ => Mode::Both,
    };
    let opts = Options { sampling: Sampling::with_per_interval(args.t_refine), tolerance: tol };
    let mut eval = quasistate::quasi_state(&field, mode, &opts)?;
    eval.report.seed = seed;
    if let Some(path) = &args.reeb_json {
        let graph = ReebGraph::build(&field)?;
        let decomposition = graph.decompose()?;
        let mut w = sink(&Some(path.clone()))?;
        json::to_writer(&mut w, &graph.to_json(Some(&decomposition)))?;
        writeln!(w)?;
        w.flush()?;
    }
    let mut out = sink(&args.out)?;
    match args.format {
        Format::Json => {
            json::to_writer(&mut out, &eval.report)?;
            writeln!(out)?;
        }
        Format::Csv => out.write_all(eval.curve.to_csv().as_bytes())?,
    }
    out.flush()?;
    Ok(!eval.report.flagged)
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which is taken by the tolerance flag
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 4 } else { 0 });
        }
    };
    if let Ok(v) = std::env::var("TQS_THREADS") {
        let threads = match v.parse::<usize>() {
            Ok(t) if t > 0 => t,
            _ => {
                eprintln!("tqs: TQS_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(4);
            }
        };
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("tqs: {e}");
            return ExitCode::from(4);
        }
    }
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(Failure::Topology(msg)) => {
            eprintln!("tqs: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("tqs: {msg}");
            ExitCode::from(4)
        }
    }
}
