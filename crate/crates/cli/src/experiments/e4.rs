use super::e3::identity_section;
use super::{max_abs, probe_direction, Ctx, ExperimentDef, RayProbe, SectionDef};
use crate::plot::PlotSpec;
use crate::report::{Check, Section};
use anyhow::Result;
use finsler::flows::{distance_field, level_distance};
use finsler::metrics::MetricSpec;
use finsler::scalar::{isoparametric_check, RaySampler, ScalarField, Tolerances};

pub static DEF: ExperimentDef = ExperimentDef {
    sections: &[
        SectionDef {
            name: "levels",
            run: levels,
        },
        SectionDef {
            name: "level_identities",
            run: level_identities,
        },
        SectionDef {
            name: "level_distance",
            run: distance,
        },
    ],
    plots: &[
        PlotSpec {
            file: "plot_a.svg",
            title: "F^2(grad f) against c(1 - t^2)",
            x_label: "t",
            y_label: "a",
            prefix: "a/",
        },
        PlotSpec {
            file: "plot_kappa.svg",
            title: "principal curvature against sqrt(c) t / sqrt(1 - t^2)",
            x_label: "t",
            y_label: "kappa",
            prefix: "kappa/",
        },
    ],
};

pub const LEVELS: [f64; 5] = [-0.8, -0.4, 0.0, 0.4, 0.8];

/// `f = −cos(√c r)` with `r` the distance from the chart origin.
fn eigenfunction(m: &MetricSpec) -> Result<(ScalarField, f64)> {
    let c = m.sphere_chart().unwrap();
    let r = distance_field(m, &vec![0.0; m.dim()])?;
    let sc = c.sqrt();
    Ok((r.map("-cos(sqrt(c) r)", move |r| Ok(-(r.clone().scale(sc)).cos()?)), c))
}

fn probe(m: &MetricSpec) -> Result<RayProbe> {
    let (field, c) = eigenfunction(m)?;
    Ok(RayProbe {
        metric: m.clone(),
        field,
        anchor: vec![0.0; m.dim()],
        dir: probe_direction(m.dim()),
        s_max: 40.0 / c.sqrt(),
    })
}

fn levels(ctx: &Ctx) -> Result<Section> {
    let m = ctx.sphere_or("riemannian_sphere(2, c=1)")?;
    let n = m.dim();
    let (f, c) = eigenfunction(&m)?;
    let sampler = RaySampler::new(&vec![0.0; n], 40.0 / c.sqrt(), ctx.samples(), ctx.cfg.seed);
    let rep = isoparametric_check(&m, &f, &LEVELS, &sampler, Tolerances::default())?;
    let mut sec = Section::default();
    for l in &rep.levels {
        let t = l.t;
        let a = c * (1.0 - t * t);
        let b = -(n as f64) * c * t;
        let kappa = c.sqrt() * t / (1.0 - t * t).sqrt();
        let b_dev = l.b_rel_dev * l.b.abs().max(1.0);
        sec.check(Check::below(
            format!("t={t}: F^2(grad f) = c(1 - t^2)"),
            (l.a - a).abs() + l.a_max_dev,
            1e-6,
            format!("max deviation over {} samples", l.samples),
        ));
        sec.check(Check::below(
            format!("t={t}: Laplacian f = -nct"),
            (l.b - b).abs() + b_dev,
            1e-5,
            format!("max deviation over {} samples", l.samples),
        ));
        sec.check(Check::below(
            format!("t={t}: kappa = sqrt(c) t / sqrt(1 - t^2)"),
            max_abs(l.kappa.iter().map(|k| k - kappa)) + l.kappa_max_dev,
            1e-5,
            "max deviation over samples and indices",
        ));
        sec.row("a/measured", t, l.a, Some(a));
        sec.row("b/measured", t, l.b, Some(b));
        for k in &l.kappa {
            sec.row("kappa/measured", t, *k, Some(kappa));
        }
    }
    sec.extra("report", &rep)?;
    Ok(sec)
}

fn level_identities(ctx: &Ctx) -> Result<Section> {
    let m = ctx.sphere_or("riemannian_sphere(2, c=1)")?;
    let c = m.sphere_chart().unwrap();
    let p = probe(&m)?;
    let grid: Vec<f64> = (0..20).map(|i| -0.85 + 0.0895 * i as f64).collect();
    let mut sec = Section::default();
    identity_section(&mut sec, "eigenfunction", &p, &grid, c)?;
    Ok(sec)
}

/// Levels at distance `0.5` and `1.5` from the origin are one apart.
fn distance(ctx: &Ctx) -> Result<Section> {
    let m = ctx.sphere_or("riemannian_sphere(2, c=1)")?;
    let c = m.sphere_chart().unwrap();
    let p = probe(&m)?;
    let (alpha, beta) = (-(0.5 * c.sqrt()).cos(), -(1.5 * c.sqrt()).cos());
    let d = level_distance(&p.a(), alpha, beta)?;
    let mut sec = Section::default();
    sec.check(Check::below(
        "level distance from measured a(t) = 1",
        (d - 1.0).abs(),
        1e-6,
        format!("d = {d:.12} between t = {alpha:.6} and t = {beta:.6}"),
    ));
    Ok(sec)
}
