use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use finsler::flows::integrate_geodesic;
use finsler::hyper::{shape_operator, CoOrientation, FSphere, Helicoid, HypersurfacePatch, RoundSphere};
use finsler::metrics::{parse_expr, parse_metric, Density, MetricSpec, Value};
use finsler::spray::{flag_curvature, nonlinear_connection, riemann_curvature, s_curvature};
use finsler_cli::{ConfigFile, Experiment, ExperimentConfig, ExperimentReport};
use serde::Serialize;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

/// Exit status for errors that prevent checks from running.
const EXIT_ERROR: u8 = 101;
/// Largest exit status used for a failed-check count.
const EXIT_CAP: u8 = 100;

#[derive(Parser)]
#[command(name = "finsler", version, about = "Finsler geometry verification harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run experiments E1..E6 (or `all`); exit status is the number of failed checks
    Verify(VerifyArgs),
    /// Integrate a geodesic and print it as CSV
    Geodesic(GeodesicArgs),
    /// Spray, connection and curvature at one (x, y), as JSON
    Curvature(CurvatureArgs),
    /// Shape operator of a built-in patch at one parameter point, as JSON
    Shape(ShapeArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// E1..E6 or `all`; overrides `experiment` in the config file
    experiment: Option<String>,
    /// Flat TOML config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Metric override, e.g. `riemannian_sphere(2, c=4)`
    #[arg(long)]
    metric: Option<String>,
    /// ODE tolerance (default 1e-10)
    #[arg(long)]
    tol: Option<f64>,
    /// Sample size; meaning and minimum depend on the experiment
    #[arg(long)]
    samples: Option<usize>,
    /// RNG seed (default 7)
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default `results`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip plot_*.svg
    #[arg(long)]
    no_plots: bool,
}

/// Comma-separated coordinates, optionally bracketed.
#[derive(Clone, Debug)]
struct Coords(Vec<f64>);

fn parse_vec(s: &str) -> Result<Coords, String> {
    s.trim_matches(|c| c == '[' || c == ']')
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(Coords)
}

#[derive(Args)]
struct GeodesicArgs {
    #[arg(long)]
    metric: String,
    /// Start point, comma separated
    #[arg(long, value_parser = parse_vec, allow_hyphen_values = true)]
    x: Coords,
    /// Initial velocity, comma separated
    #[arg(long, value_parser = parse_vec, allow_hyphen_values = true)]
    y: Coords,
    /// Parameter length
    #[arg(long, default_value_t = 1.0)]
    s_max: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Write CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CurvatureArgs {
    #[arg(long)]
    metric: String,
    #[arg(long, value_parser = parse_vec, allow_hyphen_values = true)]
    x: Coords,
    #[arg(long, value_parser = parse_vec, allow_hyphen_values = true)]
    y: Coords,
    /// Flag direction; adds the flag curvature K(y, v)
    #[arg(long, value_parser = parse_vec, allow_hyphen_values = true)]
    v: Option<Coords>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Hint,
    Opposite,
}

#[derive(Args)]
struct ShapeArgs {
    #[arg(long)]
    metric: String,
    /// `helicoid(a=1)`, `round_sphere(R=1)` or `f_sphere(r=2, stretch=[1,1,1.3])`
    #[arg(long)]
    patch: String,
    /// Parameter point, comma separated
    #[arg(long, value_parser = parse_vec, allow_hyphen_values = true)]
    u: Coords,
    #[arg(long, value_enum, default_value = "hint")]
    side: Side,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Geodesic(a) => geodesic(a).map(|_| 0),
        Command::Curvature(a) => curvature(a).map(|_| 0),
        Command::Shape(a) => shape(a).map(|_| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn verify(a: VerifyArgs) -> Result<u8> {
    let file = match &a.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let file = file.merge(ConfigFile {
        experiment: a.experiment,
        metric: a.metric,
        tol: a.tol,
        samples: a.samples,
        seed: a.seed,
        out: a.out,
        plots: a.no_plots.then_some(false),
    });
    let which = file.experiment.clone().context("no experiment given (E1..E6 or all)")?;
    let experiments: Vec<Experiment> = if which.eq_ignore_ascii_case("all") {
        if file.metric.is_some() || file.samples.is_some() {
            bail!("--metric and --samples apply to a single experiment, not `all`");
        }
        Experiment::ALL.to_vec()
    } else {
        vec![which.parse()?]
    };
    let out = file.out.clone().unwrap_or_else(|| PathBuf::from("results"));
    let mut failed = 0usize;
    for e in experiments {
        let mut cfg = ExperimentConfig::from_file(e, &file)?;
        cfg.out = Some(out.clone());
        let start = std::time::Instant::now();
        let report = finsler_cli::run(&cfg)?;
        print_report(&report, start.elapsed().as_secs_f64());
        failed += report.failed;
    }
    Ok(failed.min(EXIT_CAP as usize) as u8)
}

fn print_report(r: &ExperimentReport, secs: f64) {
    println!("{} {}", r.experiment, r.title);
    for s in &r.sections {
        for c in &s.checks {
            let bound = c.threshold.map(|t| format!(" (< {t:e})")).unwrap_or_default();
            println!(
                "  {} {}/{}: {:e}{bound}  {}",
                if c.passed { "PASS" } else { "FAIL" },
                s.name,
                c.name,
                c.measured,
                c.detail
            );
        }
    }
    println!("  {} passed, {} failed in {secs:.2} s", r.passed, r.failed);
}

fn geodesic(a: GeodesicArgs) -> Result<()> {
    let m = parse_metric(&a.metric)?;
    let tr = integrate_geodesic(&m, &a.x.0, &a.y.0, a.s_max, a.tol)?;
    let sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(tr.csv_header())?;
    for row in tr.csv_rows() {
        w.write_record(row.iter().map(f64::to_string))?;
    }
    w.flush()?;
    if let Some(s) = tr.exit {
        eprintln!("left the chart at s = {s}");
    }
    Ok(())
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

#[derive(Serialize)]
struct CurvatureOut {
    metric: String,
    x: Vec<f64>,
    y: Vec<f64>,
    #[serde(rename = "G")]
    g: Vec<f64>,
    #[serde(rename = "N")]
    n: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    r: Vec<Vec<f64>>,
    #[serde(rename = "K")]
    k: Option<f64>,
    #[serde(rename = "S")]
    s: Option<f64>,
}

fn curvature(a: CurvatureArgs) -> Result<()> {
    let m = parse_metric(&a.metric)?;
    let (x, y) = (a.x.0, a.y.0);
    let (g, n) = nonlinear_connection(&m, &x, &y)?;
    let r = riemann_curvature(&m, &x, &y)?;
    let k = match &a.v {
        Some(v) => Some(flag_curvature(&m, &x, &y, &v.0)?),
        None => None,
    };
    let s = match m.density() {
        Density::None => None,
        _ => Some(s_curvature(&m, &x, &y)?),
    };
    let out = CurvatureOut {
        metric: m.name().to_string(),
        x,
        y,
        g,
        n: rows(&n),
        r: rows(&r.r_mixed),
        k,
        s,
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn number(e: &finsler::metrics::MetricExpr, key: &str, pos: usize) -> Option<f64> {
    e.params.iter().enumerate().find_map(|(i, p)| match (&p.key, &p.value) {
        (Some(k), Value::Number(v)) if k == key => Some(*v),
        (None, Value::Number(v)) if i == pos => Some(*v),
        _ => None,
    })
}

fn list(e: &finsler::metrics::MetricExpr, key: &str) -> Option<Vec<f64>> {
    e.params.iter().find_map(|p| match (&p.key, &p.value) {
        (Some(k), Value::List(v)) if k == key => Some(v.clone()),
        _ => None,
    })
}

fn patch(m: &MetricSpec, src: &str) -> Result<Box<dyn HypersurfacePatch>> {
    let e = parse_expr(src)?;
    let n = m.dim();
    let center = list(&e, "center").unwrap_or_else(|| vec![0.0; n]);
    Ok(match e.name.as_str() {
        "helicoid" => Box::new(Helicoid {
            a: number(&e, "a", 0).unwrap_or(1.0),
        }),
        "round_sphere" => Box::new(RoundSphere {
            radius: number(&e, "R", 0).unwrap_or(1.0),
            center,
        }),
        "f_sphere" => {
            let s = FSphere::new(m, number(&e, "r", 0).unwrap_or(1.0), &center)?;
            Box::new(match list(&e, "stretch") {
                Some(st) => s.stretched(&st),
                None => s,
            })
        }
        other => bail!("unknown patch {other:?} (helicoid, round_sphere, f_sphere)"),
    })
}

fn shape(a: ShapeArgs) -> Result<()> {
    let m = parse_metric(&a.metric)?;
    let p = patch(&m, &a.patch)?;
    let side = match a.side {
        Side::Hint => CoOrientation::Hint,
        Side::Opposite => CoOrientation::Opposite,
    };
    let sd = shape_operator(&m, p.as_ref(), &a.u.0, side)?;
    println!("{}", serde_json::to_string_pretty(&sd)?);
    Ok(())
}
