use super::*;
use crate::hyper::{shape_operator, CoOrientation, Graph, ParamDomain, RoundSphere};
use crate::metrics::parse_metric;
use crate::scalar::{gradient, ScalarField};
use std::f64::consts::PI;
use std::sync::Arc;

/// Unit vector along `e₂` at `(0.5, 0)` on the chart of curvature `c`.
fn sphere_start(c: f64) -> (Vec<f64>, Vec<f64>) {
    let x = vec![0.5, 0.0];
    let speed = 2.0 / (1.0 + c * 0.25);
    (x, vec![0.0, 1.0 / speed])
}

#[test]
fn minkowski_geodesics_are_straight() {
    let m = parse_metric("randers(b=[0.3,-0.2,0.1])").unwrap();
    let tr = integrate_geodesic(&m, &[1.0, 0.0, -1.0], &[0.2, 0.5, -0.4], 3.0, 1e-10).unwrap();
    for p in &tr.samples {
        for i in 0..3 {
            let exact = [1.0, 0.0, -1.0][i] + p.s * [0.2, 0.5, -0.4][i];
            assert!((p.x[i] - exact).abs() < 1e-12);
        }
    }
}

#[test]
fn sphere_geodesic_closes_and_keeps_speed() {
    for c in [1.0, 4.0] {
        let m = parse_metric(&format!("riemannian_sphere(2, c={c})")).unwrap();
        let (x0, y0) = sphere_start(c);
        let period = 2.0 * PI / c.sqrt();
        let tr = integrate_geodesic(&m, &x0, &y0, period, 1e-10).unwrap();
        assert!(tr.exit.is_none());
        let (xe, _) = tr.at(period);
        assert!((xe[0] - 0.5).abs() < 1e-6 && xe[1].abs() < 1e-6, "{xe:?}");
        // half-way point is the antipode −x/(c|x|²)
        let (xh, _) = tr.at(0.5 * period);
        assert!((xh[0] + 0.5 / (c * 0.25)).abs() < 1e-6, "{xh:?}");
    }
    let m = parse_metric("riemannian_sphere(2)").unwrap();
    let (x0, y0) = sphere_start(1.0);
    let tr = integrate_geodesic(&m, &x0, &y0, 10.0, 1e-10).unwrap();
    assert!(tr.speed_drift().unwrap() < 1e-7);
    assert_eq!(tr.csv_header(), vec!["s", "x0", "x1", "y0", "y1"]);
    assert_eq!(tr.csv_rows().len(), tr.samples.len());
}

#[test]
fn geodesic_through_the_chart_pole_reports_exit() {
    let m = parse_metric("riemannian_sphere(2)").unwrap();
    // from the origin the great circle runs to infinity at s = π
    let tr = integrate_geodesic(&m, &[0.0, 0.0], &[0.5, 0.0], 4.0, 1e-9).unwrap();
    let exit = tr.exit.expect("exit reported");
    assert!(exit < PI && exit > 3.0, "{exit}");
}

#[test]
fn conjugate_values_on_spheres() {
    for c in [1.0, 4.0] {
        let m = parse_metric(&format!("riemannian_sphere(2, c={c})")).unwrap();
        let (x0, y0) = sphere_start(c);
        let tr = integrate_geodesic(&m, &x0, &y0, 1.5 * PI / c.sqrt(), 1e-10).unwrap();
        let jf = jacobi_field(&tr, &[0.0, 0.0], &[y0[1], 0.0], 1e-11).unwrap();
        let z = jf.first_zero.unwrap();
        assert!((z - PI / c.sqrt()).abs() < 1e-5, "c={c}: {z}");
        assert!(jf.norm_at_zero.unwrap() < 1e-6);
        // |J| = sin(√c s)/√c for a unit initial derivative
        let mid = jf.samples.iter().find(|p| p.s > 0.3).unwrap();
        let exact = (c.sqrt() * mid.s).sin() / c.sqrt();
        assert!((mid.norm - exact).abs() < 1e-7, "{} vs {exact}", mid.norm);
    }
}

#[test]
fn euclidean_jacobi_fields_are_affine() {
    let m = parse_metric("euclidean(3)").unwrap();
    let tr = integrate_geodesic(&m, &[0.0; 3], &[1.0, 0.0, 0.0], 5.0, 1e-10).unwrap();
    let jf = jacobi_field(&tr, &[0.0, 1.0, 0.0], &[0.0, 0.5, 0.3], 1e-10).unwrap();
    assert!(jf.first_zero.is_none());
    for p in &jf.samples {
        assert!((p.j[1] - (1.0 + 0.5 * p.s)).abs() < 1e-10 && (p.j[2] - 0.3 * p.s).abs() < 1e-10);
    }
}

#[test]
fn scalar_riccati_closed_forms() {
    assert!((riccati_scalar_closed(0.0, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
    assert_eq!(riccati_scalar_closed(0.0, 0.0, 3.0).unwrap(), 0.0);
    for s in [0.1, 0.7, 2.0] {
        let k = riccati_scalar_closed(1.0, 1.0 / 0.3f64.tan(), s).unwrap();
        assert!((k - 1.0 / (0.3 + s).tan()).abs() < 1e-12);
    }
    // κ′ = −(κ² + c) checked by central differences on each branch
    for (c, k0) in [(0.0, -0.7), (2.0, 0.4), (-1.0, 3.0), (-1.0, 0.2), (-1.0, -2.0), (-4.0, 2.0)] {
        let h = 1e-5;
        let s = 0.2;
        let d = (riccati_scalar_closed(c, k0, s + h).unwrap() - riccati_scalar_closed(c, k0, s - h).unwrap()) / (2.0 * h);
        let k = riccati_scalar_closed(c, k0, s).unwrap();
        assert!((d + k * k + c).abs() < 1e-6, "c={c} κ0={k0}");
        assert!((riccati_scalar_closed(c, k0, 0.0).unwrap() - k0).abs() < 1e-14);
    }
}

#[test]
fn scalar_riccati_ode_matches_closed_form() {
    for (c, k0) in [(0.0, 1.0), (0.0, -0.5), (1.0, 0.5), (1.0, -1.0), (-1.0, 0.3), (-1.0, -1.5), (-1.0, 2.0)] {
        let s_end = riccati_pole(c, k0).map(|p| 0.9 * p).unwrap_or(3.0);
        for i in 1..=10 {
            let s = s_end * i as f64 / 10.0;
            let a = riccati_scalar_closed(c, k0, s).unwrap();
            let b = riccati_scalar_ode(c, k0, s, 1e-12).unwrap();
            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0), "c={c} κ0={k0} s={s}: {a} {b}");
        }
    }
    match riccati_scalar_ode(0.0, -1.0, 2.0, 1e-12) {
        Err(crate::FinslerError::Pole { at, .. }) => assert!((at - 1.0).abs() < 1e-7, "{at}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn focal_and_comparison_tables() {
    assert!((focal_curvature(0.0, 2.0).unwrap() - 0.5).abs() < 1e-15);
    assert!((focal_curvature(1.0, PI / 4.0).unwrap() - 1.0).abs() < 1e-14);
    let k = focal_curvature(-1.0, 10.0).unwrap();
    assert!(k > 1.0 && (k - 1.0 / 10f64.tanh()).abs() < 1e-15);
    assert!(focal_curvature(1.0, PI).is_err() && focal_curvature(0.0, 0.0).is_err());
    let c0 = comparison(0.0);
    assert_eq!((c0.s(1.3), c0.s_prime(1.3)), (1.3, 1.0));
    let c1 = comparison(1.0);
    assert!((c1.s(PI / 2.0) - 1.0).abs() < 1e-15 && c1.s_prime(PI / 2.0).abs() < 1e-15);
    assert!((comparison(-1.0).s(1.0) - 1f64.sinh()).abs() < 1e-15);
    for c in [1e-8, -1e-8] {
        assert!((comparison(c).s(2.0) - 2.0).abs() < 1e-7);
    }
    assert!((comparison(1.0).laplacian_r(3, 1.0) - 2.0 / 1f64.tan()).abs() < 1e-14);
}

#[test]
fn euclidean_sphere_transport_blows_up_at_centre() {
    let m = parse_metric("euclidean(3)").unwrap();
    let p = RoundSphere {
        radius: 1.0,
        center: vec![0.0; 3],
    };
    let tr = riccati_matrix_transport(&m, &p, &[1.1, 0.4], CoOrientation::Opposite, 2.0, 1e-10).unwrap();
    for smp in tr.samples.iter().filter(|p| p.s < 0.99) {
        for k in &smp.kappas {
            assert!((k - 1.0 / (1.0 - smp.s)).abs() < 1e-7 * k.abs(), "{} {k}", smp.s);
        }
    }
    let b = tr.blow_up.unwrap();
    assert!((b.s - 1.0).abs() < 1e-4, "{b:?}");
    assert_eq!(b.multiplicity, 2);
}

#[test]
fn hyperplane_transport_stays_flat() {
    let m = parse_metric("euclidean(3)").unwrap();
    let g = Graph {
        h: ScalarField::linear(&[0.0, 0.0]),
        domain: ParamDomain::new(&[-1.0, -1.0], &[1.0, 1.0]),
    };
    let tr = riccati_matrix_transport(&m, &g, &[0.2, 0.1], CoOrientation::Hint, 3.0, 1e-10).unwrap();
    assert!(tr.blow_up.is_none());
    assert!(tr.a_final.iter().flatten().all(|v| v.abs() < 1e-14));
}

#[test]
fn geodesic_circle_on_sphere_follows_cot_shift() {
    let m = parse_metric("riemannian_sphere(2)").unwrap();
    let rho: f64 = 0.4;
    let r0 = 2.0 * rho.atan();
    let p = RoundSphere {
        radius: rho,
        center: vec![0.0; 2],
    };
    let tr = riccati_matrix_transport(&m, &p, &[0.8], CoOrientation::Opposite, 3.0, 1e-10).unwrap();
    assert!((tr.initial.kappas[0] - focal_curvature(1.0, r0).unwrap()).abs() < 1e-9);
    for smp in tr.samples.iter().filter(|p| p.s < 0.9 * r0) {
        assert!((smp.kappas[0] - 1.0 / (r0 - smp.s).tan()).abs() < 1e-6);
    }
    assert!((tr.blow_up.unwrap().s - r0).abs() < 1e-4);
}

#[test]
fn transport_matches_parallel_hypersurface() {
    let m = parse_metric("randers_shear(3, eps=0.2)").unwrap();
    let base = Arc::new(Graph {
        h: ScalarField::new("bump", |u| Ok((u[0].square() - u[1].square() * 0.5) * 0.3 + &u[0] * &u[1] * 0.1)),
        domain: ParamDomain::new(&[-1.0, -1.0], &[1.0, 1.0]),
    });
    let u = [0.3, -0.2];
    let s = 0.4;
    let tr = riccati_matrix_transport(&m, base.as_ref(), &u, CoOrientation::Hint, s, 1e-11).unwrap();
    let par = ParallelPatch::new(&m, base, CoOrientation::Hint, s);
    let direct = shape_operator(&m, &par, &u, CoOrientation::Hint).unwrap();
    let last = tr.samples.last().unwrap();
    for i in 0..3 {
        assert!((direct.x[i] - last.x[i]).abs() < 1e-8);
        assert!((direct.normal[i] - last.y[i]).abs() < 1e-7, "{:?} {:?}", direct.normal, last.y);
    }
    for (a, b) in direct.kappas.iter().zip(tr.final_kappas()) {
        assert!((a - b).abs() < 1e-5, "{:?} {:?}", direct.kappas, tr.final_kappas());
    }
}

#[test]
fn level_distance_integrals() {
    let d = level_distance(&|t| Ok(2.0 * t), 0.5, 2.0).unwrap();
    assert!((d - 1.0).abs() < 1e-12);
    assert!((level_distance(&|_| Ok(1.0), -0.3, 1.2).unwrap() - 1.5).abs() < 1e-12);
    for c in [1.0f64, 4.0] {
        let (r1, r2): (f64, f64) = (0.0, 1.2 / f64::sqrt(c));
        let sc = c.sqrt();
        let d = level_distance(&|t| Ok(c * (1.0 - t * t)), -(sc * r1).cos(), -(sc * r2).cos()).unwrap();
        assert!((d - (r2 - r1)).abs() < 1e-10, "{d}");
    }
    assert!(level_distance(&|t| Ok((t - 0.1) * (t - 0.1)), 0.1, 1.0).is_err());
}

#[test]
fn space_form_distances() {
    let e = parse_metric("euclidean(3)").unwrap();
    assert!((space_form_distance(&e, &[1.0, 0.0, 0.0], &[1.0, 3.0, 4.0]).unwrap() - 5.0).abs() < 1e-14);
    let r = parse_metric("randers(b=[0.5,0])").unwrap();
    let p = [0.3, -0.2];
    assert!((space_form_distance(&r, &p, &[1.3, -0.2]).unwrap() - 1.5).abs() < 1e-14);
    assert!((space_form_distance(&r, &p, &[-0.7, -0.2]).unwrap() - 0.5).abs() < 1e-14);
    let s = parse_metric("riemannian_sphere(2)").unwrap();
    let x = [0.7, 0.0];
    assert!((space_form_distance(&s, &[0.0, 0.0], &x).unwrap() - 2.0 * 0.7f64.atan()).abs() < 1e-14);
    // 1e-4 short of the antipode (−2, 0), where the chart scale is 2/5
    let near = space_form_distance(&s, &sphere_start(1.0).0, &[-2.0 + 1e-4, 0.0]).unwrap();
    assert!((near - (PI - 0.4e-4)).abs() < 1e-8, "{near}");
    assert!(space_form_distance(&s, &[0.5, 0.0], &[-2.0, 0.0]).is_err());
    assert!(space_form_distance(&parse_metric("randers_shear(2)").unwrap(), &p, &x).is_err());
}

#[test]
fn shooting_confirms_sphere_distance() {
    for c in [1.0, 2.5] {
        let m = parse_metric(&format!("riemannian_sphere(2, c={c})")).unwrap();
        let (p, x) = ([0.5, 0.0], [-0.3, 0.7]);
        let shot = shooting_distance(&m, &p, &x, 1e-12).unwrap();
        let closed = space_form_distance(&m, &p, &x).unwrap();
        assert!((shot.distance - closed).abs() < 1e-7, "{} {closed}", shot.distance);
    }
}

#[test]
fn distance_fields_are_eikonal() {
    for (spec, p) in [("riemannian_sphere(2)", vec![0.5, 0.0]), ("randers(b=[0.3,0.2,0])", vec![0.1, 0.0, -0.2]), ("riemannian_sphere(3, c=2)", vec![0.1, 0.2, 0.0])] {
        let m = parse_metric(spec).unwrap();
        let r = distance_field(&m, &p).unwrap();
        for k in 0..5 {
            let x: Vec<f64> = (0..p.len()).map(|i| 0.3 * ((k * 3 + i) as f64).sin() + 0.05).collect();
            let g = gradient(&m, &r, &x).unwrap();
            assert!((m.norm(&x, &g.grad).unwrap() - 1.0).abs() < 1e-10, "{spec}");
        }
    }
}

#[test]
fn gradient_curves_measure_level_distance() {
    let m = parse_metric("euclidean(3)").unwrap();
    let f = ScalarField::half_sq_euclidean(&[0.0; 3]);
    let x0 = [0.6, 0.0, 0.8];
    let d = gradient_flow_distance(&m, &f, &x0, 2.0, 5.0, 1e-11).unwrap();
    assert!((d - 1.0).abs() < 1e-9, "{d}");
}
