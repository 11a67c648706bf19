use super::{max_abs, Ctx, ExperimentDef, SectionDef};
use crate::plot::PlotSpec;
use crate::report::{Check, Section};
use anyhow::Result;
use finsler::jets::{seed, Jet};
use finsler::metrics::{conic_extension_cone, parse_metric, Density, MetricSpec};
use finsler::scalar::{laplacian_sigma, ScalarField};
use finsler::spray::flag_curvature;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub static DEF: ExperimentDef = ExperimentDef {
    sections: &[
        SectionDef {
            name: "flag_curvature",
            run: flag_constancy,
        },
        SectionDef {
            name: "jets_vs_differences",
            run: jets_vs_differences,
        },
        SectionDef {
            name: "fundamental_tensor",
            run: fundamental_tensor,
        },
        SectionDef {
            name: "legendre",
            run: legendre_round_trip,
        },
        SectionDef {
            name: "sigma_laplacian",
            run: sigma_laplacian,
        },
    ],
    plots: &[PlotSpec {
        file: "plot_flag_curvature.svg",
        title: "flag curvature over random flags",
        x_label: "flag",
        y_label: "K",
        prefix: "K/",
    }],
};

const FLAG_METRICS: [&str; 4] = [
    "riemannian_sphere(2, c=1)",
    "riemannian_sphere(3, c=2)",
    "euclidean(3)",
    "randers(b=[0.4,0.1,-0.2])",
];

const PRIMAL_METRICS: [&str; 5] = [
    "euclidean(3)",
    "randers(b=[0.3,-0.2,0.4])",
    "randers_shear(3, eps=0.3)",
    "riemannian_sphere(3, c=2)",
    "product(randers(b=[0.5,0]), m=1)",
];

const CONIC: &str = "conic_ab(a=1, b=2)";

fn metrics(ctx: &Ctx, defaults: &[&str]) -> Result<Vec<MetricSpec>> {
    match &ctx.metric {
        Some(m) => Ok(vec![m.clone()]),
        None => Ok(defaults.iter().map(|s| parse_metric(s)).collect::<finsler::Result<_>>()?),
    }
}

fn normal_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-r..r)).collect()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Random `(x, y)` in the metric's domain: fibres of the conic metric are
/// drawn through the dual cone.
fn sample_xy(m: &MetricSpec, rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = m.dim();
    let x = if m.is_minkowski() { vec![0.0; n] } else { uniform_vec(rng, n, 0.5) };
    if m.has_primal() {
        loop {
            let y = normal_vec(rng, n);
            if norm2(&y) > 0.2 {
                return Ok((x, y));
            }
        }
    }
    loop {
        let xi = normal_vec(rng, n);
        if m.check_dual_covector(&x, &xi).is_ok() && xi[n - 1].abs() > 0.05 {
            return Ok((x.clone(), m.legendre_inverse(&x, &xi)?));
        }
    }
}

fn flag_constancy(ctx: &Ctx) -> Result<Section> {
    let mut sec = Section::default();
    let mut rng = ctx.rng(1);
    for m in metrics(ctx, &FLAG_METRICS)? {
        let n = m.dim();
        let expected = if let Some(c) = m.sphere_chart() {
            Some(c)
        } else if m.is_minkowski() {
            Some(0.0)
        } else {
            None
        };
        let mut ks = Vec::with_capacity(ctx.samples());
        while ks.len() < ctx.samples() {
            let x = uniform_vec(&mut rng, n, 0.6);
            let y = normal_vec(&mut rng, n);
            let v = normal_vec(&mut rng, n);
            let dot: f64 = y.iter().zip(&v).map(|(a, b)| a * b).sum();
            if dot.abs() > 0.95 * norm2(&y) * norm2(&v) {
                continue;
            }
            ks.push(flag_curvature(&m, &x, &y, &v)?);
        }
        let reference = expected.unwrap_or_else(|| ks.iter().sum::<f64>() / ks.len() as f64);
        for (i, k) in ks.iter().enumerate() {
            sec.row(&format!("K/{}", m.name()), i as f64, *k, Some(reference));
        }
        let dev = max_abs(ks.iter().map(|k| k - reference));
        let (threshold, what) = match expected {
            Some(c) if c == 0.0 => (1e-8, "max |K|".to_string()),
            Some(c) => (1e-6, format!("max |K - {c}|")),
            None => (1e-6, "max |K - mean K|".to_string()),
        };
        sec.check(Check::below(
            format!("{}: constant flag curvature", m.name()),
            dev,
            threshold,
            format!("{what} over {} flags", ks.len()),
        ));
    }
    Ok(sec)
}

type TestFn = Box<dyn Fn(&[Jet]) -> finsler::Result<Jet>>;

struct Case {
    name: &'static str,
    f: TestFn,
    points: Vec<Vec<f64>>,
}

fn split_norm(m: MetricSpec) -> TestFn {
    Box::new(move |z: &[Jet]| {
        let n = z.len() / 2;
        m.norm_jet(&z[..n], &z[n..])
    })
}

fn kernel_cases(rng: &mut ChaCha8Rng) -> Result<Vec<Case>> {
    const PER_CASE: usize = 10;
    let mut cases = Vec::new();
    let composite: TestFn = Box::new(|x: &[Jet]| {
        let r2 = x[0].square() + x[1].square() * 2.0 + 1.0;
        let a = (&x[0] * &x[1]).sin()? + r2.sqrt()?;
        Ok(a * (x[1].clone().scale(0.3)).exp()? + (r2.ln()? * x[0].atan()?))
    });
    cases.push(Case {
        name: "composite",
        f: composite,
        points: (0..PER_CASE).map(|_| uniform_vec(rng, 2, 1.5)).collect(),
    });
    for (name, src) in [("randers_shear_norm", "randers_shear(3, eps=0.3)"), ("sphere_norm", "riemannian_sphere(3, c=2)")] {
        let m = parse_metric(src)?;
        let mut points = Vec::new();
        while points.len() < PER_CASE {
            let mut z = uniform_vec(rng, 3, 0.5);
            let y = normal_vec(rng, 3);
            if norm2(&y) < 0.3 {
                continue;
            }
            z.extend(y);
            points.push(z);
        }
        cases.push(Case {
            name,
            f: split_norm(m),
            points,
        });
    }
    let conic = parse_metric(CONIC)?;
    let mut covectors = Vec::new();
    while covectors.len() < PER_CASE {
        let xi = normal_vec(rng, 3);
        if conic_extension_cone(1.0, &xi) && xi[2].abs() > 0.05 {
            covectors.push(xi);
        }
    }
    let vectors = covectors
        .iter()
        .map(|xi| conic.legendre_inverse(&[0.0; 3], xi))
        .collect::<finsler::Result<Vec<_>>>()?;
    let origin = |z: &[Jet]| -> Vec<Jet> { (0..3).map(|_| Jet::constant(z[0].space(), 0.0)).collect() };
    let cm = conic.clone();
    cases.push(Case {
        name: "conic_conorm",
        f: Box::new(move |xi: &[Jet]| cm.conorm_jet(&origin(xi), xi)),
        points: covectors,
    });
    let cm = conic;
    cases.push(Case {
        name: "conic_norm_implicit",
        f: Box::new(move |y: &[Jet]| cm.norm_jet(&origin(y), y)),
        points: vectors,
    });
    Ok(cases)
}

/// Relative step: the homogeneous test functions have derivatives that
/// scale with `1/|x|`.
const FD_STEP: f64 = 1e-3;

/// Fourth-order central difference of `g` along `e_i`.
fn five_point(g: &dyn Fn(&[f64]) -> Result<f64>, x: &[f64], i: usize) -> Result<f64> {
    let h = FD_STEP * norm2(x).min(1.0);
    let at = |k: f64| -> Result<f64> {
        let mut p = x.to_vec();
        p[i] += k * h;
        g(&p)
    };
    Ok((at(-2.0)? - 8.0 * at(-1.0)? + 8.0 * at(1.0)? - at(2.0)?) / (12.0 * h))
}

fn jets_vs_differences(ctx: &Ctx) -> Result<Section> {
    let mut sec = Section::default();
    let mut rng = ctx.rng(2);
    let mut total = 0;
    let mut worst = 0.0f64;
    for case in kernel_cases(&mut rng)? {
        let value = |p: &[f64]| -> Result<f64> { Ok((case.f)(&seed(p, 1)?)?.value()) };
        let mut case_worst = 0.0f64;
        for x in &case.points {
            let j = (case.f)(&seed(x, 2)?)?;
            let n = x.len();
            for i in 0..n {
                let d = j.partial(&[i]);
                case_worst = case_worst.max((d - five_point(&value, x, i)?).abs() / d.abs().max(1.0));
                for k in 0..n {
                    let dk = |p: &[f64]| -> Result<f64> { Ok((case.f)(&seed(p, 1)?)?.partial(&[k])) };
                    let d2 = j.partial(&[i, k]);
                    case_worst = case_worst.max((d2 - five_point(&dk, x, i)?).abs() / d2.abs().max(1.0));
                }
            }
            total += 1;
        }
        sec.row("jet_fd_rel", total as f64, case_worst, Some(0.0));
        worst = worst.max(case_worst);
        sec.extra(case.name, case_worst)?;
    }
    sec.check(Check::below(
        "first and second jet derivatives vs finite differences",
        worst,
        1e-6,
        format!("max relative deviation over {total} cases"),
    ));
    Ok(sec)
}

fn tensor_metrics(ctx: &Ctx) -> Result<Vec<MetricSpec>> {
    let mut ms = metrics(ctx, &PRIMAL_METRICS)?;
    if ctx.metric.is_none() {
        ms.push(parse_metric(CONIC)?);
    }
    Ok(ms)
}

const TENSOR_SAMPLES: usize = 20;

fn fundamental_tensor(ctx: &Ctx) -> Result<Section> {
    let mut sec = Section::default();
    let mut rng = ctx.rng(3);
    for m in tensor_metrics(ctx)? {
        let mut indefinite = 0;
        let mut worst = 0.0f64;
        for _ in 0..TENSOR_SAMPLES {
            let (x, y) = sample_xy(&m, &mut rng)?;
            let fund = m.fundamental_tensor(&x, &y)?;
            if fund.g.clone().cholesky().is_none() {
                indefinite += 1;
            }
            let f = m.norm(&x, &y)?;
            worst = worst.max((fund.inner(&y, &y) - f * f).abs() / (f * f).max(1.0));
        }
        sec.check(Check::flag(
            format!("{}: g positive definite", m.name()),
            indefinite == 0,
            format!("{indefinite} of {TENSOR_SAMPLES} samples indefinite"),
        ));
        sec.check(Check::below(
            format!("{}: g(y, y) = F^2", m.name()),
            worst,
            1e-9,
            "max relative deviation",
        ));
    }
    Ok(sec)
}

fn legendre_round_trip(ctx: &Ctx) -> Result<Section> {
    let mut sec = Section::default();
    let mut rng = ctx.rng(4);
    for m in tensor_metrics(ctx)? {
        let mut worst = 0.0f64;
        for _ in 0..TENSOR_SAMPLES {
            let (x, y) = sample_xy(&m, &mut rng)?;
            let back = m.legendre_inverse(&x, &m.legendre(&x, &y)?)?;
            worst = worst.max(max_abs(back.iter().zip(&y).map(|(b, v)| (b - v) / v.abs().max(1.0))));
        }
        sec.check(Check::below(
            format!("{}: Legendre round trip", m.name()),
            worst,
            1e-8,
            "max relative componentwise deviation of L^-1(L(y))",
        ));
    }
    Ok(sec)
}

const SIGMA_METRICS: [&str; 4] = [
    "randers_shear(2, eps=0.3)",
    "randers_shear(3, eps=0.2)",
    "riemannian_sphere(2, c=1)",
    "randers(b=[0.4,0.2])",
];

fn sigma_laplacian(ctx: &Ctx) -> Result<Section> {
    let mut sec = Section::default();
    let mut rng = ctx.rng(5);
    let ms = match &ctx.metric {
        Some(m) if m.density() != Density::None => vec![m.clone()],
        _ => SIGMA_METRICS.iter().map(|s| parse_metric(s)).collect::<finsler::Result<_>>()?,
    };
    for m in ms {
        let n = m.dim();
        let fields = [
            ScalarField::new("wave", |x: &[Jet]| Ok(x[0].sin()? + x[1].square() + &x[0] * &x[1])),
            ScalarField::half_sq_euclidean(&vec![0.1; n]),
        ];
        let mut worst = 0.0f64;
        for f in &fields {
            for _ in 0..5 {
                let x: Vec<f64> = uniform_vec(&mut rng, n, 0.8).iter().map(|v| v + 0.9).collect();
                let ls = laplacian_sigma(&m, f, &x)?;
                worst = worst.max((ls.divergence - ls.hat_minus_s).abs());
            }
        }
        sec.check(Check::below(
            format!("{}: div_sigma grad f = hat-Laplacian f - S(grad f)", m.name()),
            worst,
            1e-7,
            "max absolute gap over 10 points",
        ));
    }
    Ok(sec)
}
