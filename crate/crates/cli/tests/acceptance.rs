//! One pass/fail line per acceptance criterion, at default configuration.

use finsler_cli::experiments::Ctx;
use finsler_cli::{run_section, Experiment, ExperimentConfig, Section};
use std::process::ExitCode;
use std::time::Instant;

struct Criterion {
    id: u32,
    title: &'static str,
    parts: &'static [(Experiment, &'static str)],
    limit_secs: Option<f64>,
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        title: "helicoid principal curvatures",
        parts: &[(Experiment::E2, "helicoid")],
        limit_secs: Some(30.0),
    },
    Criterion {
        id: 2,
        title: "euclidean distance family",
        parts: &[(Experiment::E3, "euclidean_family")],
        limit_secs: Some(10.0),
    },
    Criterion {
        id: 3,
        title: "sphere eigenfunction levels",
        parts: &[(Experiment::E4, "levels")],
        limit_secs: Some(30.0),
    },
    Criterion {
        id: 4,
        title: "trace and Riccati identities along levels",
        parts: &[(Experiment::E3, "level_identities"), (Experiment::E4, "level_identities")],
        limit_secs: None,
    },
    Criterion {
        id: 5,
        title: "focal points and Riccati transport",
        parts: &[
            (Experiment::E5, "focal_centre"),
            (Experiment::E5, "scalar_riccati"),
            (Experiment::E5, "conjugate_point"),
        ],
        limit_secs: Some(20.0),
    },
    Criterion {
        id: 6,
        title: "umbilic F-sphere, perturbations flagged",
        parts: &[(Experiment::E6, "f_sphere"), (Experiment::E6, "perturbations")],
        limit_secs: Some(60.0),
    },
    Criterion {
        id: 7,
        title: "level distance",
        parts: &[(Experiment::E6, "level_distance")],
        limit_secs: None,
    },
    Criterion {
        id: 8,
        title: "numerical kernel",
        parts: &[
            (Experiment::E1, "flag_curvature"),
            (Experiment::E1, "jets_vs_differences"),
            (Experiment::E1, "fundamental_tensor"),
            (Experiment::E1, "legendre"),
            (Experiment::E1, "sigma_laplacian"),
        ],
        limit_secs: None,
    },
    Criterion {
        id: 9,
        title: "sum-of-squares discrepancy surfaced",
        parts: &[(Experiment::E3, "sum_of_squares")],
        limit_secs: None,
    },
];

fn run(c: &Criterion) -> (bool, String) {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut total = 0;
    for &(e, name) in c.parts {
        let sec: Section = match Ctx::new(&ExperimentConfig::new(e)).and_then(|ctx| run_section(&ctx, name)) {
            Ok(s) => s,
            Err(err) => {
                failures.push(format!("{e}/{name}: {err:#}"));
                continue;
            }
        };
        total += sec.checks.len();
        for ch in sec.checks.iter().filter(|ch| !ch.passed) {
            failures.push(format!("{e}/{name}: {} = {:e} ({})", ch.name, ch.measured, ch.detail));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if let Some(limit) = c.limit_secs {
        if secs >= limit {
            failures.push(format!("runtime {secs:.2} s over {limit} s"));
        }
    }
    let limit = c.limit_secs.map(|l| format!(" (limit {l} s)")).unwrap_or_default();
    let mut line = format!("{total} checks, {secs:.2} s{limit}");
    for f in &failures {
        line.push_str("\n    ");
        line.push_str(f);
    }
    (failures.is_empty() && total > 0, line)
}

fn main() -> ExitCode {
    let mut failed = 0;
    for c in CRITERIA {
        let (ok, line) = run(c);
        println!("criterion {}: {} {}: {line}", c.id, if ok { "PASS" } else { "FAIL" }, c.title);
        failed += usize::from(!ok);
    }
    println!("acceptance: {} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
