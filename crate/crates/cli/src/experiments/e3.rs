use super::{max_abs, probe_direction, Ctx, ExperimentDef, RayProbe, SectionDef};
use crate::plot::PlotSpec;
use crate::report::{Check, Section};
use anyhow::{bail, Result};
use finsler::flows::{comparison, distance_field};
use finsler::metrics::{parse_metric, MetricSpec};
use finsler::scalar::{
    sum_of_squares_check, isoparametric_check, laplacian_hat, lemma61_identities, LevelSampler, RaySampler, ScalarField,
    Tolerances,
};

pub static DEF: ExperimentDef = ExperimentDef {
    sections: &[
        SectionDef {
            name: "euclidean_family",
            run: euclidean_family,
        },
        SectionDef {
            name: "sphere_family",
            run: sphere_family,
        },
        SectionDef {
            name: "level_identities",
            run: level_identities,
        },
        SectionDef {
            name: "sum_of_squares",
            run: sum_of_squares,
        },
    ],
    plots: &[
        PlotSpec {
            file: "plot_kappa.svg",
            title: "level-set principal curvatures of f = r^2/2",
            x_label: "t",
            y_label: "kappa",
            prefix: "kappa/",
        },
        PlotSpec {
            file: "plot_identities.svg",
            title: "trace and Riccati identity residuals",
            x_label: "t",
            y_label: "residual",
            prefix: "residual/",
        },
    ],
};

pub const EUCLIDEAN_LEVELS: [f64; 3] = [0.5, 2.0, 4.5];
/// Radii of the sphere-family levels `t = r²/2`.
const SPHERE_RADII: [f64; 3] = [0.6, 1.4, 2.2];

fn euclidean(ctx: &Ctx) -> Result<MetricSpec> {
    match &ctx.metric {
        Some(m) if m.name().starts_with("euclidean") => Ok(m.clone()),
        _ => Ok(parse_metric("euclidean(3)")?),
    }
}

fn sphere(ctx: &Ctx) -> Result<MetricSpec> {
    match &ctx.metric {
        Some(m) if m.sphere_chart().is_some() => Ok(m.clone()),
        Some(m) if !m.name().starts_with("euclidean") => {
            bail!("E3 expects euclidean(n) or riemannian_sphere(n, c), got {}", m.name())
        }
        _ => Ok(parse_metric("riemannian_sphere(3, c=1)")?),
    }
}

fn half_square_distance(m: &MetricSpec) -> Result<ScalarField> {
    let r = distance_field(m, &vec![0.0; m.dim()])?;
    Ok(r.map("half_sq_distance", |r| Ok(r.square().scale(0.5))))
}

fn chart_reach(m: &MetricSpec) -> f64 {
    m.sphere_chart().map_or(5.0, |c| 20.0 / c.sqrt())
}

/// `Σκ` on `{½r² = t}` in the space form of curvature `c`.
pub fn sum_kappa(n: usize, c: f64, t: f64) -> f64 {
    let m = (n - 1) as f64;
    if c == 0.0 {
        -m / (2.0 * t).sqrt()
    } else if c > 0.0 {
        -m * c.sqrt() / (2.0 * c * t).sqrt().tan()
    } else {
        -m * (-c).sqrt() / (-2.0 * c * t).sqrt().tanh()
    }
}

fn euclidean_family(ctx: &Ctx) -> Result<Section> {
    let m = euclidean(ctx)?;
    let n = m.dim();
    let f = ScalarField::half_sq_euclidean(&vec![0.0; n]);
    let sampler = RaySampler::new(&vec![0.0; n], 5.0, ctx.samples(), ctx.cfg.seed);
    let rep = isoparametric_check(&m, &f, &EUCLIDEAN_LEVELS, &sampler, Tolerances::default())?;
    let mut sec = Section::default();
    for l in &rep.levels {
        let t = l.t;
        let kappa = -1.0 / (2.0 * t).sqrt();
        let a_err = ((l.a - 2.0 * t).abs() + l.a_max_dev) / (2.0 * t);
        let b_err = (l.b - n as f64).abs() + l.b_rel_dev * l.b.abs().max(1.0);
        let k_err = max_abs(l.kappa.iter().map(|k| k - kappa)) + l.kappa_max_dev;
        sec.check(Check::below(format!("t={t}: a(t) = 2t"), a_err, 1e-8, "max relative deviation over samples"));
        sec.check(Check::below(format!("t={t}: b(t) = {n}"), b_err, 1e-7, "max deviation over samples"));
        sec.check(Check::below(format!("t={t}: kappa = -1/sqrt(2t)"), k_err, 1e-6, "max deviation over samples and indices"));
        for k in &l.kappa {
            sec.row("kappa/euclidean", t, *k, Some(kappa));
        }
        sec.row("a/euclidean", t, l.a, Some(2.0 * t));
        sec.row("b/euclidean", t, l.b, Some(n as f64));
    }
    sec.check(Check::flag("isoparametric on every level", rep.is_isoparametric, rep.field.clone()));
    sec.extra("report", &rep)?;
    Ok(sec)
}

fn sphere_family(ctx: &Ctx) -> Result<Section> {
    let m = sphere(ctx)?;
    let c = m.sphere_chart().unwrap();
    let n = m.dim();
    let f = half_square_distance(&m)?;
    let r_field = distance_field(&m, &vec![0.0; n])?;
    let levels: Vec<f64> = SPHERE_RADII.iter().map(|r| 0.5 * r * r / c).collect();
    let sampler = RaySampler::new(&vec![0.0; n], chart_reach(&m), ctx.samples(), ctx.cfg.seed);
    let rep = isoparametric_check(&m, &f, &levels, &sampler, Tolerances::default())?;
    let cmp = comparison(c);
    let mut sec = Section::default();
    for (li, l) in rep.levels.iter().enumerate() {
        let t = l.t;
        let r = (2.0 * t).sqrt();
        let b_exact = 1.0 + cmp.laplacian_r(n, r) * r;
        let kappa = sum_kappa(n, c, t) / (n - 1) as f64;
        let a_err = ((l.a - 2.0 * t).abs() + l.a_max_dev) / (2.0 * t);
        let b_err = (l.b - b_exact).abs() + l.b_rel_dev * l.b.abs().max(1.0);
        let k_err = max_abs(l.kappa.iter().map(|k| k - kappa)) + l.kappa_max_dev;
        let sum: f64 = l.kappa.iter().sum();
        let sq: f64 = l.kappa.iter().map(|k| k * k).sum();
        sec.check(Check::below(format!("t={t:.4}: a(t) = 2t"), a_err, 1e-8, "max relative deviation over samples"));
        sec.check(Check::below(
            format!("t={t:.4}: b(t) = 1 + r (n-1) s'/s"),
            b_err,
            1e-7,
            "max deviation over samples",
        ));
        sec.check(Check::below(
            format!("t={t:.4}: kappa = -sqrt(c) cot sqrt(2ct)"),
            k_err,
            1e-6,
            "max deviation over samples and indices",
        ));
        sec.check(Check::below(
            format!("t={t:.4}: sum kappa = -(n-1) sqrt(c) cot sqrt(2ct)"),
            (sum - sum_kappa(n, c, t)).abs() + (n - 1) as f64 * l.kappa_max_dev,
            1e-6,
            "deviation of the mean curvature",
        ));
        sec.check(Check::below(
            format!("t={t:.4}: (sum kappa)^2 = (n-1) sum kappa^2"),
            (sum * sum - (n - 1) as f64 * sq).abs() / (sum * sum).max(1.0),
            1e-8,
            "relative gap on the level means",
        ));
        let points = sampler.sample(&r_field, r, li)?;
        let mut gap = 0.0f64;
        for x in &points {
            gap = gap.max((laplacian_hat(&m, &r_field, x)? - cmp.laplacian_r(n, r)).abs());
        }
        sec.check(Check::below(
            format!("r={r:.4}: hat-Laplacian r = (n-1) s'/s"),
            gap,
            1e-7,
            format!("max deviation over {} points", points.len()),
        ));
        for k in &l.kappa {
            sec.row("kappa/sphere", t, *k, Some(kappa));
        }
        sec.row("b/sphere", t, l.b, Some(b_exact));
    }
    sec.extra("report", &rep)?;
    Ok(sec)
}

pub fn identity_section(sec: &mut Section, label: &str, probe: &RayProbe, grid: &[f64], c: f64) -> Result<()> {
    let res = lemma61_identities(&probe.a(), &probe.b(), &probe.kappas(), grid, c)?;
    for r in &res {
        sec.row(&format!("residual/trace/{label}"), r.t, r.trace_residual, Some(0.0));
        sec.row(&format!("residual/riccati/{label}"), r.t, r.riccati_residual, Some(0.0));
    }
    sec.check(Check::below(
        format!("{label}: trace identity"),
        max_abs(res.iter().map(|r| r.trace_residual)),
        1e-7,
        format!("max residual on {} levels", res.len()),
    ));
    sec.check(Check::below(
        format!("{label}: Riccati identity"),
        max_abs(res.iter().map(|r| r.riccati_residual)),
        1e-7,
        format!("max residual on {} levels", res.len()),
    ));
    sec.extra(label, &res)?;
    Ok(())
}

fn level_identities(ctx: &Ctx) -> Result<Section> {
    let mut sec = Section::default();
    let e = euclidean(ctx)?;
    let n = e.dim();
    let probe = RayProbe {
        field: ScalarField::half_sq_euclidean(&vec![0.0; n]),
        anchor: vec![0.0; n],
        dir: probe_direction(n),
        s_max: 5.0,
        metric: e,
    };
    let grid: Vec<f64> = (1..=20).map(|i| 0.2 * i as f64).collect();
    identity_section(&mut sec, "euclidean", &probe, &grid, 0.0)?;
    let s = sphere(ctx)?;
    let c = s.sphere_chart().unwrap();
    let n = s.dim();
    let probe = RayProbe {
        field: half_square_distance(&s)?,
        anchor: vec![0.0; n],
        dir: probe_direction(n),
        s_max: chart_reach(&s),
        metric: s,
    };
    let grid: Vec<f64> = (0..20)
        .map(|i| {
            let r = 0.3 + 0.12 * i as f64;
            0.5 * r * r / c
        })
        .collect();
    identity_section(&mut sec, "sphere", &probe, &grid, c)?;
    Ok(sec)
}

/// The tabulated `Σκ²` rows against the value forced by the trace row and
/// umbilicity; the flat row is expected to be flagged.
fn sum_of_squares(ctx: &Ctx) -> Result<Section> {
    let mut sec = Section::default();
    let e = euclidean(ctx)?;
    let n = e.dim();
    let probe = RayProbe {
        field: ScalarField::half_sq_euclidean(&vec![0.0; n]),
        anchor: vec![0.0; n],
        dir: probe_direction(n),
        s_max: 5.0,
        metric: e,
    };
    let mut reports = Vec::new();
    for t in EUCLIDEAN_LEVELS {
        let sq: f64 = probe.at(t)?.kappas.iter().map(|k| k * k).sum();
        let r = sum_of_squares_check(n, 0.0, t, Some(sq));
        sec.check(Check::flag(
            format!("c=0, t={t}: printed (n-1)/(sqrt2 t) flagged inconsistent"),
            !r.printed_consistent && r.measured_matches_forced == Some(true),
            format!(
                "printed {:.12}, forced (n-1)/(2t) = {:.12}, measured {sq:.12}",
                r.printed, r.forced
            ),
        ));
        sec.row("sum_sq/printed", t, r.printed, Some(r.forced));
        sec.row("sum_sq/measured", t, sq, Some(r.forced));
        reports.push(r);
    }
    let s = sphere(ctx)?;
    let c = s.sphere_chart().unwrap();
    let ns = s.dim();
    let probe = RayProbe {
        field: half_square_distance(&s)?,
        anchor: vec![0.0; ns],
        dir: probe_direction(ns),
        s_max: chart_reach(&s),
        metric: s,
    };
    for r in SPHERE_RADII {
        let t = 0.5 * r * r / c;
        let sq: f64 = probe.at(t)?.kappas.iter().map(|k| k * k).sum();
        let rep = sum_of_squares_check(ns, c, t, Some(sq));
        sec.check(Check::flag(
            format!("c={c}, t={t:.4}: printed row consistent and measured"),
            rep.printed_consistent && rep.measured_matches_forced == Some(true),
            format!("printed {:.12}, forced {:.12}, measured {sq:.12}", rep.printed, rep.forced),
        ));
        reports.push(rep);
    }
    for (c, t) in [(-1.0, 0.7), (-2.0, 0.3)] {
        let rep = sum_of_squares_check(n, c, t, None);
        sec.check(Check::flag(
            format!("c={c}, t={t}: printed row consistent"),
            rep.printed_consistent,
            format!("printed {:.12}, forced {:.12}", rep.printed, rep.forced),
        ));
        reports.push(rep);
    }
    sec.extra("rows", &reports)?;
    Ok(sec)
}
