use super::{max_abs, Ctx, ExperimentDef, SectionDef};
use crate::plot::PlotSpec;
use crate::report::{Check, Section};
use anyhow::{bail, Result};
use finsler::hyper::{shape_operator, CoOrientation, Helicoid, HypersurfacePatch};
use finsler::metrics::{conic_extension_cone, parse_expr, parse_metric, Value};

pub static DEF: ExperimentDef = ExperimentDef {
    sections: &[SectionDef {
        name: "helicoid",
        run: helicoid,
    }],
    plots: &[PlotSpec {
        file: "plot_principal_curvatures.svg",
        title: "helicoid principal curvatures over the grid",
        x_label: "grid point",
        y_label: "kappa",
        prefix: "kappa",
    }],
};

const DEFAULT_METRIC: &str = "conic_ab(a=1, b=2)";

/// The helicoid pitch equals the conic parameter `a`.
fn conic_a(src: &str) -> Result<f64> {
    let e = parse_expr(src)?;
    if e.name != "conic_ab" {
        bail!("E2 expects conic_ab(a, b), got {src}");
    }
    let a = e
        .params
        .iter()
        .enumerate()
        .find(|(i, p)| p.key.as_deref() == Some("a") || (p.key.is_none() && *i == 0))
        .map(|(_, p)| &p.value);
    match a {
        Some(Value::Number(a)) => Ok(*a),
        _ => bail!("conic_ab without a numeric a: {src}"),
    }
}

fn helicoid(ctx: &Ctx) -> Result<Section> {
    let src = ctx.cfg.metric.clone().unwrap_or_else(|| DEFAULT_METRIC.to_string());
    let metric = parse_metric(&src)?;
    let a = conic_a(&src)?;
    let patch = Helicoid { a };
    let grid = patch.domain().grid(ctx.samples());
    let mut sec = Section::default();
    for side in [CoOrientation::Hint, CoOrientation::Opposite] {
        let shapes = grid
            .iter()
            .map(|u| shape_operator(&metric, &patch, u, side))
            .collect::<finsler::Result<Vec<_>>>()?;
        for (i, s) in shapes.iter().enumerate() {
            sec.row(&format!("kappa1/{side}"), i as f64, s.kappas[0], Some(-1.0));
            sec.row(&format!("kappa2/{side}"), i as f64, s.kappas[1], Some(1.0));
            sec.row(&format!("H/{side}"), i as f64, s.h, Some(0.0));
        }
        let pts = shapes.len();
        sec.check(Check::below(
            format!("{side}: max |kappa1 + 1|"),
            max_abs(shapes.iter().map(|s| s.kappas[0] + 1.0)),
            1e-6,
            format!("{pts} grid points"),
        ));
        sec.check(Check::below(
            format!("{side}: max |kappa2 - 1|"),
            max_abs(shapes.iter().map(|s| s.kappas[1] - 1.0)),
            1e-6,
            format!("{pts} grid points"),
        ));
        sec.check(Check::below(
            format!("{side}: max |H|"),
            max_abs(shapes.iter().map(|s| s.h)),
            1e-6,
            format!("{pts} grid points"),
        ));
        let outside = shapes.iter().filter(|s| !conic_extension_cone(a, &s.normal_covector)).count();
        sec.check(Check::flag(
            format!("{side}: normal covector inside the cone"),
            outside == 0,
            format!("{outside} of {pts} outside"),
        ));
        sec.extra(
            &format!("{side}.max_residuals"),
            [
                ("unit", max_abs(shapes.iter().map(|s| s.unit_residual))),
                ("orthogonality", max_abs(shapes.iter().map(|s| s.orthogonality_residual))),
                ("self_adjoint", max_abs(shapes.iter().map(|s| s.self_adjoint_residual))),
                ("imaginary_eigenvalue", max_abs(shapes.iter().map(|s| s.max_imag_eigenvalue))),
            ],
        )?;
    }
    Ok(sec)
}
