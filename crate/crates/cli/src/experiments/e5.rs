use super::{max_abs, Ctx, ExperimentDef, SectionDef};
use crate::plot::PlotSpec;
use crate::report::{Check, Section};
use anyhow::{Context, Result};
use finsler::flows::{
    distance_field, focal_curvature, integrate_geodesic, jacobi_field, riccati_matrix_transport, riccati_pole,
    riccati_scalar_closed, riccati_scalar_ode, ParallelPatch,
};
use finsler::hyper::{shape_operator, CoOrientation, FSphere, Graph, HypersurfacePatch, LevelSetPatch, ParamDomain, RoundSphere};
use finsler::metrics::parse_metric;
use finsler::scalar::ScalarField;
use std::f64::consts::PI;
use std::sync::Arc;

pub static DEF: ExperimentDef = ExperimentDef {
    sections: &[
        SectionDef {
            name: "focal_centre",
            run: focal_centre,
        },
        SectionDef {
            name: "scalar_riccati",
            run: scalar_riccati,
        },
        SectionDef {
            name: "conjugate_point",
            run: conjugate_point,
        },
        SectionDef {
            name: "parallel_hypersurface",
            run: parallel_hypersurface,
        },
        SectionDef {
            name: "focal_table",
            run: focal_table,
        },
    ],
    plots: &[
        PlotSpec {
            file: "plot_riccati.svg",
            title: "principal curvature along inward normals of the unit sphere",
            x_label: "s",
            y_label: "kappa",
            prefix: "kappa/",
        },
        PlotSpec {
            file: "plot_jacobi.svg",
            title: "Jacobi field norm on the sphere",
            x_label: "s",
            y_label: "|J|",
            prefix: "jacobi/",
        },
    ],
};

/// Curvatures above this are left out of the table near poles.
const PLOT_CAP: f64 = 50.0;

fn focal_centre(ctx: &Ctx) -> Result<Section> {
    let m = parse_metric("euclidean(3)")?;
    let sphere = FSphere::new(&m, 1.0, &[0.0; 3])?;
    let mut sec = Section::default();
    let grid = sphere.domain().grid(ctx.samples().max(1));
    let step = (grid.len() / ctx.samples()).max(1);
    let points: Vec<&Vec<f64>> = grid.iter().step_by(step).take(ctx.samples()).collect();
    let mut worst_pole = 0.0f64;
    let mut worst_path = 0.0f64;
    let mut mult_ok = true;
    for (i, u) in points.iter().enumerate() {
        let tr = riccati_matrix_transport(&m, &sphere, u, CoOrientation::Opposite, 2.0, ctx.tol())?;
        let b = tr.blow_up.as_ref().context("no blow-up on the unit sphere")?;
        worst_pole = worst_pole.max((b.s - 1.0).abs());
        mult_ok &= b.multiplicity == 2;
        for smp in tr.samples.iter().filter(|p| p.s < 0.99) {
            let exact = 1.0 / (1.0 - smp.s);
            worst_path = worst_path.max(max_abs(smp.kappas.iter().map(|k| (k - exact) / exact)));
            if i == 0 && exact < PLOT_CAP {
                sec.row("kappa/unit_sphere", smp.s, smp.kappas[0], Some(exact));
            }
        }
    }
    sec.check(Check::below(
        "blow-up at the centre, s = 1",
        worst_pole,
        1e-4,
        format!("max |s* - 1| over {} normals", points.len()),
    ));
    sec.check(Check::flag("focal multiplicity n - 1 = 2", mult_ok, "all principal curvatures blow up together"));
    sec.check(Check::below(
        "kappa(s) = 1/(1 - s) along the way",
        worst_path,
        1e-6,
        "max relative deviation for s < 0.99",
    ));
    Ok(sec)
}

const SCALAR_CASES: [(f64, f64); 8] = [
    (0.0, 1.0),
    (0.0, -0.5),
    (1.0, 0.5),
    (1.0, -1.0),
    (4.0, 2.0),
    (-1.0, 0.3),
    (-1.0, -1.5),
    (-1.0, 2.0),
];

fn scalar_riccati(ctx: &Ctx) -> Result<Section> {
    let mut sec = Section::default();
    let mut worst = 0.0f64;
    for (c, k0) in SCALAR_CASES {
        let s_end = riccati_pole(c, k0).map_or(3.0, |p| 0.9 * p);
        let mut case = 0.0f64;
        for i in 1..=20 {
            let s = s_end * i as f64 / 20.0;
            let a = riccati_scalar_closed(c, k0, s)?;
            let b = riccati_scalar_ode(c, k0, s, ctx.tol())?;
            case = case.max((a - b).abs() / a.abs().max(1.0));
        }
        sec.row("scalar_riccati/max_error", c, case, Some(0.0));
        worst = worst.max(case);
    }
    sec.check(Check::below(
        "scalar ODE vs closed forms",
        worst,
        1e-9,
        format!("max relative deviation, {} cases on [0, 0.9 s*)", SCALAR_CASES.len()),
    ));
    let pole = match riccati_scalar_ode(0.0, -1.0, 2.0, ctx.tol()) {
        Err(finsler::FinslerError::Pole { at, .. }) => at,
        other => anyhow::bail!("expected a pole, got {other:?}"),
    };
    sec.check(Check::below("scalar ODE pole for c = 0, kappa0 = -1 at s = 1", (pole - 1.0).abs(), 1e-6, format!("pole at {pole}")));
    Ok(sec)
}

/// Start point and unit velocity along `e₂` at `(0.5, 0)` in the chart.
fn sphere_start(c: f64) -> (Vec<f64>, Vec<f64>) {
    let speed = 2.0 / (1.0 + 0.25 * c);
    (vec![0.5, 0.0], vec![0.0, 1.0 / speed])
}

/// The radius of the small geodesic sphere whose normal flow focuses at
/// the antipode.
const TINY: f64 = 1e-2;

fn conjugate_point(ctx: &Ctx) -> Result<Section> {
    let m = ctx.sphere_or("riemannian_sphere(2, c=1)")?;
    anyhow::ensure!(m.dim() == 2, "conjugate-point check runs on surfaces, got {}", m.name());
    let c = m.sphere_chart().unwrap();
    let expected = PI / c.sqrt();
    let (p, y0) = sphere_start(c);
    let tr = integrate_geodesic(&m, &p, &y0, 1.5 * expected, ctx.tol())?;
    let jf = jacobi_field(&tr, &[0.0, 0.0], &[y0[1], 0.0], ctx.tol())?;
    let zero = jf.first_zero.context("Jacobi field has no zero")?;
    let mut sec = Section::default();
    for smp in jf.samples.iter().step_by(4) {
        sec.row("jacobi/norm", smp.s, smp.norm, Some((c.sqrt() * smp.s).sin().abs() / c.sqrt()));
    }
    sec.check(Check::below(
        "first Jacobi zero at pi/sqrt(c)",
        (zero - expected).abs(),
        1e-5,
        format!("zero at {zero:.10}, |J| there {:.2e}", jf.norm_at_zero.unwrap_or(f64::NAN)),
    ));
    let patch = LevelSetPatch {
        field: distance_field(&m, &p)?,
        level: TINY,
        anchor: p.clone(),
        s_max: 1.0,
    };
    let rt = riccati_matrix_transport(&m, &patch, &[PI / 2.0], CoOrientation::Hint, 1.2 * expected, ctx.tol())?;
    let b = rt.blow_up.as_ref().context("no blow-up from the small geodesic sphere")?;
    let pole = TINY + b.s;
    for smp in rt.samples.iter() {
        let exact = -c.sqrt() / (c.sqrt() * (TINY + smp.s)).tan();
        if exact.abs() < PLOT_CAP {
            sec.row("kappa/small_sphere", smp.s + TINY, smp.kappas[0], Some(exact));
        }
    }
    sec.check(Check::below(
        "Riccati pole from a small geodesic sphere = Jacobi zero",
        (pole - zero).abs(),
        1e-4,
        format!("radius {TINY} + blow-up {:.10} = {pole:.10}", b.s),
    ));
    sec.check(Check::below(
        "initial curvature of the small sphere = -sqrt(c) cot(sqrt(c) r)",
        (rt.initial.kappas[0] + focal_curvature(c, TINY)?).abs() / focal_curvature(c, TINY)?,
        1e-8,
        "relative deviation",
    ));
    Ok(sec)
}

fn parallel_hypersurface(ctx: &Ctx) -> Result<Section> {
    let m = parse_metric("randers_shear(3, eps=0.2)")?;
    let base = Arc::new(Graph {
        h: ScalarField::new("bump", |u| Ok((u[0].square() - u[1].square() * 0.5) * 0.3 + &u[0] * &u[1] * 0.1)),
        domain: ParamDomain::new(&[-1.0, -1.0], &[1.0, 1.0]),
    });
    let mut sec = Section::default();
    let mut worst = 0.0f64;
    for (u, s) in [([0.3, -0.2], 0.4), ([-0.4, 0.5], 0.25)] {
        let tr = riccati_matrix_transport(&m, base.as_ref(), &u, CoOrientation::Hint, s, ctx.tol())?;
        let par = ParallelPatch::new(&m, base.clone(), CoOrientation::Hint, s);
        let direct = shape_operator(&m, &par, &u, CoOrientation::Hint)?;
        worst = worst.max(max_abs(direct.kappas.iter().zip(tr.final_kappas()).map(|(a, b)| a - b)));
    }
    sec.check(Check::below(
        "transported kappa = kappa of the parallel hypersurface",
        worst,
        1e-5,
        format!("{} on a graph, two normals", m.name()),
    ));
    Ok(sec)
}

fn focal_table(ctx: &Ctx) -> Result<Section> {
    let mut sec = Section::default();
    let mut worst = 0.0f64;
    for (c, s) in [(0.0, 0.5), (0.0, 2.0), (1.0, 0.3), (1.0, 2.5), (4.0, 0.7), (-1.0, 0.4), (-1.0, 3.0)] {
        // κ′ = −(κ² + c) runs opposite to the shape-operator convention
        let pole = riccati_pole(c, -focal_curvature(c, s)?).context("no pole")?;
        worst = worst.max((pole - s).abs() / s);
    }
    sec.check(Check::below(
        "Riccati from the focal curvature at distance s has its pole at s",
        worst,
        1e-12,
        "max relative deviation",
    ));
    let m = parse_metric("riemannian_sphere(2)")?;
    let rho: f64 = 0.4;
    let r0 = 2.0 * rho.atan();
    let circle = RoundSphere {
        radius: rho,
        center: vec![0.0; 2],
    };
    let tr = riccati_matrix_transport(&m, &circle, &[0.8], CoOrientation::Opposite, 3.0, ctx.tol())?;
    sec.check(Check::below(
        "geodesic circle: initial kappa = focal curvature of its radius",
        (tr.initial.kappas[0] - focal_curvature(1.0, r0)?).abs(),
        1e-9,
        format!("radius {r0:.10}"),
    ));
    let b = tr.blow_up.context("no blow-up inside the geodesic circle")?;
    sec.check(Check::below(
        "geodesic circle focuses at its centre",
        (b.s - r0).abs(),
        1e-4,
        format!("blow-up at {:.10}", b.s),
    ));
    Ok(sec)
}
