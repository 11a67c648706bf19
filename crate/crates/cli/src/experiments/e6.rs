use super::{max_abs, probe_direction, Ctx, ExperimentDef, RayProbe, SectionDef};
use crate::plot::PlotSpec;
use crate::report::{Check, Section};
use anyhow::{bail, Result};
use finsler::flows::{distance_field, gradient_flow_distance, level_distance};
use finsler::hyper::{umbilic_check, CoOrientation, FSphere, Graph, HypersurfacePatch, ParamDomain};
use finsler::metrics::{parse_metric, MetricSpec};
use finsler::scalar::{LevelSampler, RaySampler, ScalarField};

pub static DEF: ExperimentDef = ExperimentDef {
    sections: &[
        SectionDef {
            name: "f_sphere",
            run: f_sphere,
        },
        SectionDef {
            name: "perturbations",
            run: perturbations,
        },
        SectionDef {
            name: "level_distance",
            run: distance,
        },
    ],
    plots: &[PlotSpec {
        file: "plot_lambda.svg",
        title: "mean principal curvature over the patch grid",
        x_label: "grid point",
        y_label: "lambda",
        prefix: "lambda/",
    }],
};

const RADIUS: f64 = 2.0;
const SPREAD_TOL: f64 = 1e-5;

fn randers(ctx: &Ctx) -> Result<MetricSpec> {
    let m = ctx.metric_or("randers(b=[0.4,0,0])")?;
    if !m.is_minkowski() || m.dim() != 3 {
        bail!("E6 expects a Minkowski metric on R^3, got {}", m.name());
    }
    Ok(m)
}

/// Inward normals of `{F(x) = r}` have `κ = 1/r` in every direction.
fn f_sphere(ctx: &Ctx) -> Result<Section> {
    let m = randers(ctx)?;
    let patch = FSphere::new(&m, RADIUS, &[0.0; 3])?;
    let grid = patch.domain().grid(ctx.samples());
    let rep = umbilic_check(&m, &patch, CoOrientation::Opposite, &grid, SPREAD_TOL)?;
    let mut sec = Section::default();
    for (i, l) in rep.lambdas.iter().enumerate() {
        sec.row("lambda/f_sphere", i as f64, *l, Some(1.0 / RADIUS));
    }
    sec.check(Check::below(
        format!("F-sphere r={RADIUS}: principal curvature spread"),
        rep.max_spread,
        SPREAD_TOL,
        format!("max over {} grid points", rep.points),
    ));
    sec.check(Check::below(
        "lambda constant over the patch",
        rep.lambda_constancy.unwrap_or(f64::INFINITY),
        SPREAD_TOL,
        "max |lambda(u) - lambda(u0)|",
    ));
    sec.check(Check::below(
        "lambda = 1/r",
        max_abs(rep.lambdas.iter().map(|l| l - 1.0 / RADIUS)),
        1e-6,
        "max deviation",
    ));
    sec.extra("max_spread", rep.max_spread)?;
    Ok(sec)
}

fn perturbations(ctx: &Ctx) -> Result<Section> {
    let m = randers(ctx)?;
    let mut sec = Section::default();
    let stretched = FSphere::new(&m, RADIUS, &[0.0; 3])?.stretched(&[1.0, 1.0, 1.3]);
    let grid = stretched.domain().grid(5);
    let rep = umbilic_check(&m, &stretched, CoOrientation::Opposite, &grid, SPREAD_TOL)?;
    for (i, l) in rep.lambdas.iter().enumerate() {
        sec.row("lambda/stretched", i as f64, *l, None);
    }
    sec.check(Check::flag(
        "ellipsoidal perturbation (1, 1, 1.3) flagged non-umbilic",
        !rep.is_umbilic_pointwise,
        format!("max spread {:.3e}", rep.max_spread),
    ));
    let graph = Graph {
        h: ScalarField::new("paraboloid", |u| Ok(u[0].square() * 0.25 + u[1].square() * 0.15 + &u[0] * &u[1] * 0.05)),
        domain: ParamDomain::new(&[-0.5, -0.5], &[0.5, 0.5]),
    };
    let rep = umbilic_check(&m, &graph, CoOrientation::Hint, &graph.domain().grid(5), SPREAD_TOL)?;
    sec.check(Check::flag(
        "paraboloid graph flagged non-umbilic",
        !rep.is_umbilic_pointwise,
        format!("max spread {:.3e}", rep.max_spread),
    ));
    Ok(sec)
}

const ALPHA: f64 = 0.5;
const BETA: f64 = 2.0;
const FLOW_POINTS: usize = 8;

/// `½F(x)²` in a Minkowski space: `a(t) = 2t`, levels `F = 1` and `F = 2`.
fn half_square_norm(m: &MetricSpec) -> Result<ScalarField> {
    let r = distance_field(m, &[0.0; 3])?;
    Ok(r.map("half_sq_norm", |r| Ok(r.square().scale(0.5))))
}

fn distance_case(sec: &mut Section, ctx: &Ctx, label: &str, m: &MetricSpec, f: ScalarField) -> Result<()> {
    let probe = RayProbe {
        metric: m.clone(),
        field: f.clone(),
        anchor: vec![0.0; 3],
        dir: probe_direction(3),
        s_max: 5.0,
    };
    let d = level_distance(&probe.a(), ALPHA, BETA)?;
    sec.check(Check::below(
        format!("{label}: level distance from measured a(t) = 1"),
        (d - 1.0).abs(),
        1e-6,
        format!("d = {d:.12}"),
    ));
    let sampler = RaySampler::new(&[0.0; 3], 5.0, FLOW_POINTS, ctx.cfg.seed);
    let starts = sampler.sample(&f, ALPHA, 0)?;
    let mut worst = 0.0f64;
    for (i, x0) in starts.iter().enumerate() {
        let g = gradient_flow_distance(m, &f, x0, BETA, 5.0, ctx.tol())?;
        sec.row(&format!("geodesic_distance/{label}"), i as f64, g, Some(d));
        worst = worst.max((g - d).abs());
    }
    sec.check(Check::below(
        format!("{label}: geodesic distance between the levels = level distance"),
        worst,
        1e-4,
        format!("max over {} gradient curves from t = {ALPHA}", starts.len()),
    ));
    Ok(())
}

fn distance(ctx: &Ctx) -> Result<Section> {
    let mut sec = Section::default();
    distance_case(
        &mut sec,
        ctx,
        "euclidean",
        &parse_metric("euclidean(3)")?,
        ScalarField::half_sq_euclidean(&[0.0; 3]),
    )?;
    let m = randers(ctx)?;
    let f = half_square_norm(&m)?;
    distance_case(&mut sec, ctx, "randers", &m, f)?;
    Ok(sec)
}
