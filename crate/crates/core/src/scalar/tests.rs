use super::*;
use crate::metrics::parse_metric;

/// `r = (2/√c) atan(√c |x|)`, the chart distance from the origin.
fn sphere_distance_from_origin(c: f64) -> ScalarField {
    ScalarField::new("sphere_r", move |x| {
        let mut q = Jet::zero(x[0].space());
        for xi in x {
            q = q + xi.square();
        }
        Ok(q.sqrt()?.scale(c.sqrt()).atan()?.scale(2.0 / c.sqrt()))
    })
}

fn minkowski_distance(metric: &MetricSpec, p: &[f64]) -> ScalarField {
    let m = metric.clone();
    let p = p.to_vec();
    ScalarField::new("minkowski_r", move |x| {
        let y: Vec<Jet> = x.iter().zip(&p).map(|(a, b)| a - *b).collect();
        m.norm_jet(x, &y)
    })
}

#[test]
fn euclidean_half_square() {
    let m = parse_metric("euclidean(3)").unwrap();
    let f = ScalarField::half_sq_euclidean(&[0.0; 3]);
    let x = [0.3, -1.0, 2.0];
    let g = gradient(&m, &f, &x).unwrap();
    for i in 0..3 {
        assert!((g.grad[i] - x[i]).abs() < 1e-14);
    }
    let h = hessian_matrix(&m, &f, &x).unwrap();
    assert!((h - DMatrix::identity(3, 3)).amax() < 1e-14);
    assert!((laplacian_hat(&m, &f, &x).unwrap() - 3.0).abs() < 1e-13);
}

#[test]
fn linear_gradient_is_constant() {
    let m = parse_metric("euclidean(2)").unwrap();
    let f = ScalarField::linear(&[0.6, -0.8]);
    let g = gradient(&m, &f, &[5.0, 1.0]).unwrap();
    assert!((g.grad[0] - 0.6).abs() < 1e-15 && (g.grad[1] + 0.8).abs() < 1e-15);
    let lc = level_curvatures(&m, &f, &[5.0, 1.0]).unwrap();
    assert!((lc.grad_norm - 1.0).abs() < 1e-15);
    assert!(lc.kappas[0].abs() < 1e-15);
}

#[test]
fn critical_points_are_flagged() {
    let m = parse_metric("euclidean(2)").unwrap();
    let f = ScalarField::half_sq_euclidean(&[1.0, 1.0]);
    let g = gradient(&m, &f, &[1.0, 1.0]).unwrap();
    assert!(g.critical);
    assert!(matches!(laplacian_hat(&m, &f, &[1.0, 1.0]), Err(FinslerError::CriticalPoint(_))));
}

#[test]
fn euclidean_radial_laplacian() {
    let m = parse_metric("euclidean(3)").unwrap();
    let f = ScalarField::new("r", |x| Ok((x[0].square() + x[1].square() + x[2].square()).sqrt()?));
    assert!((laplacian_hat(&m, &f, &[0.0, 2.0, 0.0]).unwrap() - 1.0).abs() < 1e-13);
}

#[test]
fn randers_distance_is_eikonal() {
    let m = parse_metric("randers(b=[0.4,0.1,0])").unwrap();
    let p = [0.2, 0.0, -0.3];
    let f = minkowski_distance(&m, &p);
    for x in [[1.0, 0.5, 0.2], [-1.0, 0.3, 0.0], [0.0, -2.0, 1.0]] {
        let g = gradient(&m, &f, &x).unwrap();
        assert!((m.norm(&x, &g.grad).unwrap() - 1.0).abs() < 1e-10);
        // df(X) = g_{∇f}(∇f, X)
        let fund = m.fundamental_tensor(&x, &g.grad).unwrap();
        let xv = [0.3, -0.7, 0.4];
        let lhs: f64 = g.df.iter().zip(&xv).map(|(a, b)| a * b).sum();
        assert!((lhs - fund.inner(&g.grad, &xv)).abs() < 1e-10);
    }
}

#[test]
fn hessian_is_symmetric_and_traces_to_laplacian() {
    let m = parse_metric("randers_shear(2,0.3)").unwrap();
    let f = ScalarField::new("f", |x| Ok((x[0].sin()? + x[1].square()) + x[0].clone() * x[1].clone()));
    let x = [0.4, 0.7];
    let h = hessian_matrix(&m, &f, &x).unwrap();
    assert!((h[(0, 1)] - h[(1, 0)]).abs() < 1e-9);
    let a = hessian(&m, &f, &x, &[1.0, 2.0], &[-0.5, 0.3]).unwrap();
    let b = hessian(&m, &f, &x, &[-0.5, 0.3], &[1.0, 2.0]).unwrap();
    assert!((a - b).abs() < 1e-9);
    let g = gradient(&m, &f, &x).unwrap();
    let fund = m.fundamental_tensor(&x, &g.grad).unwrap();
    let tr = (fund.g_inv * h).trace();
    assert!((tr - laplacian_hat(&m, &f, &x).unwrap()).abs() < 1e-12);
}

#[test]
fn sigma_laplacian_routes_agree() {
    let fields = [
        ScalarField::new("f", |x| Ok(x[0].sin()? + x[1].square() + x[0].clone() * x[1].clone())),
        ScalarField::half_sq_euclidean(&[0.1, -0.2]),
    ];
    for src in ["randers_shear(2,0.3)", "riemannian_sphere(2,1)", "randers(b=[0.4,0.2])"] {
        let m = parse_metric(src).unwrap();
        for f in &fields {
            let ls = laplacian_sigma(&m, f, &[0.4, 0.7]).unwrap();
            assert!((ls.divergence - ls.hat_minus_s).abs() < 1e-7, "{src} {ls:?}");
        }
    }
}

#[test]
fn euclidean_distance_family_is_isoparametric() {
    let m = parse_metric("euclidean(3)").unwrap();
    let f = ScalarField::half_sq_euclidean(&[0.0; 3]);
    let sampler = RaySampler::new(&[0.0; 3], 5.0, 16, 1);
    let rep = isoparametric_check(&m, &f, &[0.5, 2.0, 4.5], &sampler, Tolerances::default()).unwrap();
    assert!(rep.is_isoparametric);
    for l in &rep.levels {
        assert!((l.a - 2.0 * l.t).abs() < 1e-8 * 2.0 * l.t);
        assert!((l.b - 3.0).abs() < 1e-7);
        for k in &l.kappa {
            assert!((k + 1.0 / (2.0 * l.t).sqrt()).abs() < 1e-6);
        }
    }
}

#[test]
fn sphere_eigenfunction_levels() {
    let m = parse_metric("riemannian_sphere(2,1)").unwrap();
    let f = sphere_distance_from_origin(1.0).map("-cos r", |r| Ok(-r.cos()?));
    let sampler = RaySampler::new(&[0.0, 0.0], 20.0, 12, 3);
    let levels = [-0.6, 0.0, 0.6];
    let rep = isoparametric_check(&m, &f, &levels, &sampler, Tolerances::default()).unwrap();
    for l in &rep.levels {
        assert!((l.a - (1.0 - l.t * l.t)).abs() < 1e-6, "{l:?}");
        assert!((l.b + 2.0 * l.t).abs() < 1e-5, "{l:?}");
        assert!((l.kappa[0] - l.t / (1.0 - l.t * l.t).sqrt()).abs() < 1e-5, "{l:?}");
    }
}

#[test]
fn level_identities_on_closed_form_families() {
    let grid: Vec<f64> = (1..=20).map(|i| 0.2 * i as f64).collect();
    let r = lemma61_identities(
        &|t| Ok(2.0 * t),
        &|_| Ok(3.0),
        &|t| Ok(vec![-1.0 / (2.0 * t).sqrt(); 2]),
        &grid,
        0.0,
    )
    .unwrap();
    for row in &r {
        assert!(row.trace_residual.abs() < 1e-10 && row.riccati_residual < 1e-9, "{row:?}");
    }
    let grid: Vec<f64> = (0..20).map(|i| -0.85 + 0.0895 * i as f64).collect();
    let r = lemma61_identities(
        &|t| Ok(1.0 - t * t),
        &|t| Ok(-2.0 * t),
        &|t| Ok(vec![t / (1.0 - t * t).sqrt()]),
        &grid,
        1.0,
    )
    .unwrap();
    for row in &r {
        assert!(row.trace_residual.abs() < 1e-10 && row.riccati_residual < 1e-8, "{row:?}");
    }
    assert!(lemma61_identities(&|_| Ok(-1.0), &|_| Ok(0.0), &|_| Ok(vec![]), &[0.5], 0.0).is_err());
}

#[test]
fn sum_of_squares_flags_only_the_flat_row() {
    let flat = sum_of_squares_check(3, 0.0, 2.0, Some(0.5));
    assert!(!flat.printed_consistent);
    assert!((flat.forced - 0.5).abs() < 1e-15);
    assert_eq!(flat.measured_matches_forced, Some(true));
    assert!(sum_of_squares_check(3, 1.0, 0.4, None).printed_consistent);
    assert!(sum_of_squares_check(4, -2.0, 0.7, None).printed_consistent);
}
