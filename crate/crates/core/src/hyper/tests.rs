use super::*;
use crate::metrics::{conic_extension_cone, parse_metric};
use crate::scalar::ScalarField;

#[test]
fn euclidean_sphere_outward() {
    let m = parse_metric("euclidean(3)").unwrap();
    let p = RoundSphere {
        radius: 2.0,
        center: vec![0.5, 0.0, -1.0],
    };
    let u = [0.7, 1.9];
    let sd = shape_operator(&m, &p, &u, CoOrientation::Hint).unwrap();
    let radial: Vec<f64> = sd.x.iter().zip(&p.center).map(|(a, b)| (a - b) / 2.0).collect();
    for i in 0..3 {
        assert!((sd.normal[i] - radial[i]).abs() < 1e-14);
    }
    for k in &sd.kappas {
        assert!((k + 0.5).abs() < 1e-12);
    }
    assert!((sd.h + 1.0).abs() < 1e-12);
    assert_eq!(sd.multiplicities, vec![2]);
}

#[test]
fn helicoid_in_conic_metric_has_curvatures_plus_minus_one() {
    let m = parse_metric("conic_ab(a=1,b=2)").unwrap();
    let p = Helicoid { a: 1.0 };
    for u in [[0.1, 0.3], [0.3, 0.7], [0.45, 5.0]] {
        for side in [CoOrientation::Hint, CoOrientation::Opposite] {
            let sd = shape_operator(&m, &p, &u, side).unwrap();
            assert!(conic_extension_cone(1.0, &sd.normal_covector), "{u:?}");
            assert!((sd.kappas[0] + 1.0).abs() < 1e-8, "{u:?} {:?}", sd.kappas);
            assert!((sd.kappas[1] - 1.0).abs() < 1e-8, "{u:?} {:?}", sd.kappas);
            assert!(sd.h.abs() < 1e-8);
            assert!(sd.unit_residual < 1e-10 && sd.orthogonality_residual < 1e-9);
            assert!(sd.self_adjoint_residual < 1e-7 && sd.max_imag_eigenvalue < 1e-9);
        }
    }
}

#[test]
fn helicoid_normal_leaves_the_cone_past_one_half() {
    let m = parse_metric("conic_ab(a=1,b=2)").unwrap();
    let n = unit_normal(&m, &Helicoid { a: 1.0 }, &[0.7, 0.3], CoOrientation::Hint).unwrap();
    let xi = m.legendre(&[0.0; 3], &n).unwrap();
    assert!(!conic_extension_cone(1.0, &xi));
    assert!(unit_normal(&m, &Helicoid { a: 1.0 }, &[1.2, 0.3], CoOrientation::Hint).is_err());
}

#[test]
fn randers_line_normal_solves_the_normal_system() {
    let m = parse_metric("randers(b=[0.5,0])").unwrap();
    let line = Graph {
        h: ScalarField::linear(&[0.0]),
        domain: ParamDomain::new(&[-1.0], &[1.0]),
    };
    for side in [CoOrientation::Hint, CoOrientation::Opposite] {
        let n = unit_normal(&m, &line, &[0.2], side).unwrap();
        let fund = m.fundamental_tensor(&[0.2, 0.0], &n).unwrap();
        assert!(fund.inner(&n, &[1.0, 0.0]).abs() < 1e-10);
        assert!((m.norm(&[0.2, 0.0], &n).unwrap() - 1.0).abs() < 1e-10);
    }
    // the two co-orientations are not negatives of each other
    let up = unit_normal(&m, &line, &[0.2], CoOrientation::Hint).unwrap();
    let down = unit_normal(&m, &line, &[0.2], CoOrientation::Opposite).unwrap();
    assert!((up[0] + down[0]).abs() > 1e-3 || (up[1] + down[1]).abs() > 1e-3);
}

#[test]
fn randers_f_sphere_is_umbilic_inward() {
    let m = parse_metric("randers(b=[0.4,0,0])").unwrap();
    let p = FSphere::new(&m, 2.0, &[0.0; 3]).unwrap();
    let grid = p.domain().grid(4);
    let rep = umbilic_check(&m, &p, CoOrientation::Opposite, &grid, 1e-6).unwrap();
    assert!(rep.is_umbilic_pointwise, "{rep:?}");
    assert!(rep.lambdas.iter().all(|l| (l - 0.5).abs() < 1e-8), "{:?}", rep.lambdas);
    assert!(rep.lambda_constancy.unwrap() < 1e-8);
    let out = shape_operator(&m, &p, &grid[3], CoOrientation::Hint).unwrap();
    assert!(out.kappas.iter().all(|k| (k + 0.5).abs() < 1e-8), "{:?}", out.kappas);
}

#[test]
fn stretched_sphere_is_not_umbilic() {
    let m = parse_metric("randers(b=[0.4,0,0])").unwrap();
    let p = FSphere::new(&m, 2.0, &[0.0; 3]).unwrap().stretched(&[1.0, 1.0, 1.3]);
    let rep = umbilic_check(&m, &p, CoOrientation::Opposite, &p.domain().grid(3), 1e-6).unwrap();
    assert!(!rep.is_umbilic_pointwise);
    assert!(rep.lambda_constancy.is_none());
}

#[test]
fn level_set_patch_reproduces_round_sphere() {
    let m = parse_metric("euclidean(3)").unwrap();
    let p = LevelSetPatch {
        field: ScalarField::half_sq_euclidean(&[0.0; 3]),
        level: 2.0,
        anchor: vec![0.0; 3],
        s_max: 10.0,
    };
    let sd = shape_operator(&m, &p, &[1.0, 2.0], CoOrientation::Hint).unwrap();
    for k in &sd.kappas {
        assert!((k + 0.5).abs() < 1e-10, "{:?}", sd.kappas);
    }
}

#[test]
fn flat_graph_has_zero_shape_operator() {
    let m = parse_metric("randers(b=[0.2,0.1,0])").unwrap();
    let g = Graph {
        h: ScalarField::linear(&[0.3, -0.2]),
        domain: ParamDomain::new(&[-1.0, -1.0], &[1.0, 1.0]),
    };
    let sd = shape_operator(&m, &g, &[0.1, 0.4], CoOrientation::Hint).unwrap();
    assert!(sd.kappas.iter().all(|k| k.abs() < 1e-12));
}

#[test]
fn grid_is_cell_centred() {
    let d = ParamDomain::new(&[0.0, 0.0], &[1.0, 2.0]);
    let g = d.grid(2);
    assert_eq!(g, vec![vec![0.25, 0.5], vec![0.25, 1.5], vec![0.75, 0.5], vec![0.75, 1.5]]);
    assert!(g.iter().all(|u| d.contains(u)));
}
