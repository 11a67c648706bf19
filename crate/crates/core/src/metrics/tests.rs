use super::*;
use crate::jets::seed;

fn randers_dual_closed_form(b: &[f64], xi: &[f64]) -> f64 {
    let b2: f64 = b.iter().map(|v| v * v).sum();
    let bx: f64 = b.iter().zip(xi).map(|(a, c)| a * c).sum();
    let x2: f64 = xi.iter().map(|v| v * v).sum();
    (((1.0 - b2) * x2 + bx * bx).sqrt() - bx) / (1.0 - b2)
}

#[test]
fn euclidean_density_is_one() {
    for n in 2..=4 {
        let m = parse_metric(&format!("euclidean({n})")).unwrap();
        match m.density() {
            Density::Constant(s) => assert!((s - 1.0).abs() < 1e-12, "n={n}: {s}"),
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn randers_bh_density_matches_closed_form() {
    let m = parse_metric("randers(b=[0.4,0,0])").unwrap();
    let Density::Constant(s) = m.density() else { panic!() };
    assert!((s - (1.0f64 - 0.16).powf(2.0)).abs() < 1e-10, "{s}");
    let m = parse_metric("randers(b=[0.3,0.2])").unwrap();
    let Density::Constant(s) = m.density() else { panic!() };
    assert!((s - (1.0f64 - 0.13).powf(1.5)).abs() < 1e-10, "{s}");
}

#[test]
fn doubling_the_norm_scales_density_by_two_to_the_n() {
    let m = parse_metric("randers(b=[0.3,0.1,0])").unwrap();
    let doubled = MetricSpec::new("2F", Arc::new(Scaled(m.model().clone(), 2.0)));
    let a = bh_volume_density(&m).unwrap();
    let b = bh_volume_density(&doubled).unwrap();
    assert!((b / a - 8.0).abs() < 1e-10);
}

#[derive(Debug)]
struct Scaled(Arc<dyn MetricModel>, f64);

impl MetricModel for Scaled {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn has_primal(&self) -> bool {
        true
    }
    fn primal(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        Ok(self.0.primal(x, y)?.scale(self.1))
    }
    fn is_minkowski(&self) -> bool {
        true
    }
}

#[test]
fn randers_legendre_inverse_matches_closed_dual() {
    let b = [0.5, -0.2, 0.1];
    let m = parse_metric("randers(b=[0.5,-0.2,0.1])").unwrap();
    let x = [0.0; 3];
    for xi in [[1.0, 0.0, 0.0], [0.3, -1.2, 0.7], [-2.0, 0.5, 0.1]] {
        let f = m.conorm(&x, &xi).unwrap();
        assert!((f - randers_dual_closed_form(&b, &xi)).abs() < 1e-10);
        let y = m.legendre_inverse(&x, &xi).unwrap();
        let back = m.legendre(&x, &y).unwrap();
        for i in 0..3 {
            assert!((back[i] - xi[i]).abs() < 1e-10);
        }
        // F(L⁻¹ξ) = F*(ξ)
        assert!((m.norm(&x, &y).unwrap() - f).abs() < 1e-10);
    }
}

#[test]
fn conorm_jet_derivatives_match_closed_dual() {
    let b = [0.4, 0.1];
    let m = parse_metric("randers(b=[0.4,0.1])").unwrap();
    let xi0 = [0.7, -0.4];
    let xis = seed(&xi0, 3).unwrap();
    let space = xis[0].space().clone();
    let xs: Vec<Jet> = (0..2).map(|_| Jet::constant(&space, 0.0)).collect();
    let f = m.conorm_jet(&xs, &xis).unwrap();
    let h = 1e-4;
    let fd = (randers_dual_closed_form(&b, &[xi0[0] + h, xi0[1]])
        - randers_dual_closed_form(&b, &[xi0[0] - h, xi0[1]]))
        / (2.0 * h);
    assert!((f.partial(&[0]) - fd).abs() < 1e-7);
    let fdd = (randers_dual_closed_form(&b, &[xi0[0], xi0[1] + h]) - 2.0 * f.value()
        + randers_dual_closed_form(&b, &[xi0[0], xi0[1] - h]))
        / (h * h);
    assert!((f.partial(&[1, 1]) - fdd).abs() < 1e-5);
}

#[test]
fn fundamental_tensor_reproduces_norm() {
    for src in ["randers(b=[0.4,0.2,0])", "riemannian_sphere(3,1)", "randers_shear(3,0.3)"] {
        let m = parse_metric(src).unwrap();
        let x = [0.2, -0.1, 0.3];
        let y = [0.5, 1.0, -0.7];
        let g = m.fundamental_tensor(&x, &y).unwrap();
        let f = m.norm(&x, &y).unwrap();
        assert!((g.inner(&y, &y) - f * f).abs() < 1e-12, "{src}");
        let l = m.legendre(&x, &y).unwrap();
        let gy = g.lower(&y);
        for i in 0..3 {
            assert!((l[i] - gy[i]).abs() < 1e-12);
        }
    }
}

#[test]
fn randers_tensor_matches_finite_differences() {
    let m = parse_metric("randers(b=[0.3,0.3])").unwrap();
    let x = [0.0, 0.0];
    let y = [0.8, -0.3];
    let g = m.fundamental_tensor(&x, &y).unwrap();
    let h = 1e-4;
    let e = |dy: [f64; 2]| {
        let z = [y[0] + dy[0], y[1] + dy[1]];
        0.5 * m.norm(&x, &z).unwrap().powi(2)
    };
    let g01 = (e([h, h]) - e([h, -h]) - e([-h, h]) + e([-h, -h])) / (4.0 * h * h);
    assert!((g.g[(0, 1)] - g01).abs() < 1e-6);
}

#[test]
fn cartan_tensor_is_symmetric() {
    let m = parse_metric("randers(b=[0.4,0.2,0.1])").unwrap();
    let ys = seed(&[0.3, 1.0, -0.5], 3).unwrap();
    let space = ys[0].space().clone();
    let xs: Vec<Jet> = (0..3).map(|_| Jet::constant(&space, 0.0)).collect();
    let h = m.norm_jet(&xs, &ys).unwrap().square().scale(0.25);
    let c = |i, j, k| h.partial(&[i, j, k]);
    assert!((c(0, 1, 2) - c(2, 0, 1)).abs() < 1e-14);
    // C_ijk y^k = 0
    let y = [0.3, 1.0, -0.5];
    for i in 0..3 {
        for j in 0..3 {
            let s: f64 = (0..3).map(|k| c(i, j, k) * y[k]).sum();
            assert!(s.abs() < 1e-12);
        }
    }
}

#[test]
fn reverse_randers_flips_drift() {
    let m = parse_metric("randers(b=[0.5,0])").unwrap();
    let r = reverse_metric(&m);
    let x = [0.0, 0.0];
    assert!((m.norm(&x, &[1.0, 0.0]).unwrap() - 1.5).abs() < 1e-15);
    assert!((r.norm(&x, &[1.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
    let r2 = parse_metric("reverse(randers(b=[0.5,0]))").unwrap();
    assert_eq!(r2.name(), r.name());
}

#[test]
fn conic_dual_is_even_and_homogeneous() {
    let m = parse_metric("conic_ab(a=1,b=2)").unwrap();
    let x = [0.0; 3];
    let xi = [1.0, 0.5, 0.3];
    let f = m.conorm(&x, &xi).unwrap();
    let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
    assert!((m.conorm(&x, &neg).unwrap() - f).abs() < 1e-14);
    let big: Vec<f64> = xi.iter().map(|v| 3.0 * v).collect();
    assert!((m.conorm(&x, &big).unwrap() - 3.0 * f).abs() < 1e-13);
}

#[test]
fn conic_dual_hessian_of_half_square_is_positive_definite() {
    let m = parse_metric("conic_ab(a=1,b=2)").unwrap();
    for xi0 in [[1.0, 0.2, 0.3], [0.1, -1.0, 0.4], [0.7, 0.7, -0.2]] {
        assert!(conic_extension_cone(1.0, &xi0));
        let xis = seed(&xi0, 2).unwrap();
        let space = xis[0].space().clone();
        let xs: Vec<Jet> = (0..3).map(|_| Jet::constant(&space, 0.0)).collect();
        let h = m.conorm_jet(&xs, &xis).unwrap().square().scale(0.5);
        let hess = DMatrix::from_fn(3, 3, |i, j| h.partial(&[i, j]));
        assert!(hess.cholesky().is_some(), "{xi0:?}");
    }
}

#[test]
fn conic_primal_through_newton_round_trips() {
    let m = parse_metric("conic_ab(a=1,b=2)").unwrap();
    let x = [0.0; 3];
    let xi = [0.9, -0.3, 0.25];
    let y = m.legendre_inverse(&x, &xi).unwrap();
    let back = m.legendre(&x, &y).unwrap();
    for i in 0..3 {
        assert!((back[i] - xi[i]).abs() < 1e-10);
    }
    assert!((m.norm(&x, &y).unwrap() - m.conorm(&x, &xi).unwrap()).abs() < 1e-10);
}

#[test]
fn conic_rejects_points_outside_domain() {
    let m = parse_metric("conic_ab(a=1,b=2)").unwrap();
    let x = [0.0; 3];
    assert!(matches!(m.conorm(&x, &[0.1, 0.0, 1.0]), Err(FinslerError::Domain { .. })));
    assert!(matches!(m.conorm(&x, &[1.0, 0.0, 0.0]), Err(FinslerError::Domain { .. })));
}

#[test]
fn invalid_parameters_are_rejected() {
    for src in ["randers(b=[1.2,0])", "conic_ab(a=-1,b=2)", "riemannian_sphere(2,-1)", "nope(1)"] {
        assert!(matches!(parse_metric(src), Err(FinslerError::InvalidParams { .. })), "{src}");
    }
}

#[test]
fn sphere_density_matches_tensor_determinant() {
    let m = parse_metric("riemannian_sphere(3,1)").unwrap();
    let x = [0.3, 0.1, -0.4];
    let g = m.fundamental_tensor(&x, &[1.0, 0.0, 0.0]).unwrap();
    let d = m.density_jet(&constants(&x)).unwrap().value();
    assert!((d - g.g.determinant().sqrt()).abs() < 1e-13);
}

#[test]
fn shear_density_matches_quadrature() {
    let m = parse_metric("randers_shear(2,0.4)").unwrap();
    let x = [0.3, 0.9];
    let d = m.density_jet(&constants(&x)).unwrap().value();
    let q = bh_density_at(&m, &x).unwrap();
    assert!((d - q).abs() < 1e-10, "{d} vs {q}");
}

#[test]
fn product_metric_density_and_norm() {
    let m = parse_metric("product(randers(b=[0.3,0]),m=1)").unwrap();
    assert_eq!(m.dim(), 3);
    let x = [0.0; 3];
    let f = m.norm(&x, &[1.0, 0.0, 1.0]).unwrap();
    assert!((f - (1.69f64 + 1.0).sqrt()).abs() < 1e-14);
}
