use finsler::jets::{seed, Jet};
use finsler::metrics::{conic_extension_cone, parse_metric, MetricSpec};
use finsler::spray::flag_curvature;
use proptest::prelude::*;

const FD_STEP: f64 = 1e-4;

fn test_fn(x: &[Jet]) -> Jet {
    let r2 = x[0].square() + x[1].square() * 2.0 + 1.0;
    let a = (&x[0] * &x[1]).sin().unwrap() + r2.sqrt().unwrap();
    a * (x[1].clone().scale(0.3)).exp().unwrap() + (r2.ln().unwrap() * x[0].atan().unwrap())
}

fn eval(x: &[f64]) -> f64 {
    test_fn(&seed(x, 1).unwrap()).value()
}

fn vec3(lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, 3)
}

fn nonzero3() -> impl Strategy<Value = Vec<f64>> {
    vec3(-2.0, 2.0).prop_filter("y away from zero", |y| y.iter().map(|v| v * v).sum::<f64>() > 0.05)
}

fn primal_metrics() -> Vec<MetricSpec> {
    ["euclidean(3)", "randers(b=[0.3,-0.2,0.4])", "randers_shear(3, eps=0.3)", "riemannian_sphere(3, c=2)", "product(randers(b=[0.5,0]), m=1)"]
        .iter()
        .map(|s| parse_metric(s).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jet_derivatives_match_central_differences(x in prop::collection::vec(-1.5f64..1.5, 2)) {
        let j = test_fn(&seed(&x, 2).unwrap());
        for i in 0..2 {
            let mut p = x.clone();
            let mut m = x.clone();
            p[i] += FD_STEP;
            m[i] -= FD_STEP;
            let fd = (eval(&p) - eval(&m)) / (2.0 * FD_STEP);
            let d = j.partial(&[i]);
            prop_assert!((d - fd).abs() <= 1e-6 * d.abs().max(1.0), "∂{i}: {d} vs {fd}");
            let fd2 = (eval(&p) - 2.0 * eval(&x) + eval(&m)) / (FD_STEP * FD_STEP);
            let d2 = j.partial(&[i, i]);
            prop_assert!((d2 - fd2).abs() <= 1e-5 * d2.abs().max(1.0), "∂{i}{i}: {d2} vs {fd2}");
        }
    }

    #[test]
    fn norms_are_positively_homogeneous(x in vec3(-0.5, 0.5), y in nonzero3(), lam in 0.1f64..10.0) {
        for m in primal_metrics() {
            let f = m.norm(&x, &y).unwrap();
            let ly: Vec<f64> = y.iter().map(|v| lam * v).collect();
            let fl = m.norm(&x, &ly).unwrap();
            prop_assert!((fl - lam * f).abs() <= 1e-12 * fl.max(1.0), "{}", m.name());
        }
    }

    #[test]
    fn fundamental_tensor_is_positive_and_reproduces_f(x in vec3(-0.5, 0.5), y in nonzero3()) {
        for m in primal_metrics() {
            let fund = m.fundamental_tensor(&x, &y).unwrap();
            prop_assert!(fund.g.clone().cholesky().is_some(), "{} not PD", m.name());
            let f = m.norm(&x, &y).unwrap();
            let gyy = fund.inner(&y, &y);
            prop_assert!((gyy - f * f).abs() <= 1e-9 * (f * f).max(1.0), "{}: {gyy} vs {}", m.name(), f * f);
        }
    }

    #[test]
    fn legendre_round_trip(x in vec3(-0.5, 0.5), y in nonzero3()) {
        for m in primal_metrics() {
            let xi = m.legendre(&x, &y).unwrap();
            let back = m.legendre_inverse(&x, &xi).unwrap();
            for i in 0..3 {
                prop_assert!((back[i] - y[i]).abs() <= 1e-8 * y[i].abs().max(1.0), "{}: {back:?} vs {y:?}", m.name());
            }
            // F*(L(y)) = F(y)
            let fs = m.conorm(&x, &xi).unwrap();
            prop_assert!((fs - m.norm(&x, &y).unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn conic_dual_round_trip(xi in vec3(-2.0, 2.0)) {
        prop_assume!(conic_extension_cone(1.0, &xi) && xi[2].abs() > 0.05);
        let m = parse_metric("conic_ab(a=1, b=2)").unwrap();
        let y = m.legendre_inverse(&[0.0; 3], &xi).unwrap();
        let back = m.legendre(&[0.0; 3], &y).unwrap();
        for i in 0..3 {
            prop_assert!((back[i] - xi[i]).abs() <= 1e-8 * xi[i].abs().max(1.0));
        }
    }

    #[test]
    fn sphere_flags_have_curvature_c(x in vec3(-0.6, 0.6), y in nonzero3(), v in nonzero3(), c in 0.3f64..3.0) {
        let nn: f64 = y.iter().map(|a| a * a).sum::<f64>().sqrt() * v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let dot: f64 = y.iter().zip(&v).map(|(a, b)| a * b).sum();
        prop_assume!(dot.abs() < 0.95 * nn);
        let m = parse_metric(&format!("riemannian_sphere(3, c={c})")).unwrap();
        let k = flag_curvature(&m, &x, &y, &v).unwrap();
        prop_assert!((k - c).abs() < 1e-6, "{k} vs {c}");
    }
}
