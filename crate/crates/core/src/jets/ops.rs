use super::space::factorial;
use super::{Jet, JetError};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

fn check_same(a: &Jet, b: &Jet) {
    assert!(
        Arc::ptr_eq(&a.space, &b.space)
            || (a.num_vars() == b.num_vars() && a.order() == b.order()),
        "jet spaces differ: ({}, {}) vs ({}, {})",
        a.num_vars(),
        a.order(),
        b.num_vars(),
        b.order()
    );
}

fn mul_jets(a: &Jet, b: &Jet) -> Jet {
    check_same(a, b);
    let mut out = vec![0.0; a.coeffs.len()];
    for &(i, j, k) in a.space.products() {
        out[k as usize] += a.coeffs[i as usize] * b.coeffs[j as usize];
    }
    Jet { space: a.space.clone(), coeffs: out }
}

fn zip_with(a: &Jet, b: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
    check_same(a, b);
    let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| f(*x, *y)).collect();
    Jet { space: a.space.clone(), coeffs }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $body(self, rhs)
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $body(&self, &rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $body(&self, rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $body(self, &rhs)
            }
        }
    };
}

binop!(Add, add, |a: &Jet, b: &Jet| zip_with(a, b, |x, y| x + y));
binop!(Sub, sub, |a: &Jet, b: &Jet| zip_with(a, b, |x, y| x - y));
binop!(Mul, mul, mul_jets);
binop!(Div, div, |a: &Jet, b: &Jet| mul_jets(a, &b.recip()));

macro_rules! scalar_op {
    ($trait:ident, $method:ident, $f:expr, $g:expr) => {
        impl $trait<f64> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: f64) -> Jet {
                $f(self.clone(), rhs)
            }
        }
        impl $trait<f64> for Jet {
            type Output = Jet;
            fn $method(self, rhs: f64) -> Jet {
                $f(self, rhs)
            }
        }
        impl $trait<&Jet> for f64 {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $g(self, rhs.clone())
            }
        }
        impl $trait<Jet> for f64 {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $g(self, rhs)
            }
        }
    };
}

scalar_op!(
    Add,
    add,
    |mut a: Jet, s: f64| {
        a.coeffs[0] += s;
        a
    },
    |s: f64, mut a: Jet| {
        a.coeffs[0] += s;
        a
    }
);
scalar_op!(
    Sub,
    sub,
    |mut a: Jet, s: f64| {
        a.coeffs[0] -= s;
        a
    },
    |s: f64, a: Jet| {
        let mut n = -a;
        n.coeffs[0] += s;
        n
    }
);
scalar_op!(Mul, mul, |a: Jet, s: f64| a.scale(s), |s: f64, a: Jet| a.scale(s));
scalar_op!(Div, div, |a: Jet, s: f64| a.scale(1.0 / s), |s: f64, a: Jet| a.recip().scale(s));

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.clone().scale(-1.0)
    }
}

/// Univariate coefficients of `(a + t)^p`, i.e. `C(p, k) a^(p-k)`.
fn power_series(a: f64, p: f64, order: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(order + 1);
    let mut binom = 1.0;
    for k in 0..=order {
        out.push(binom * a.powf(p - k as f64));
        binom *= (p - k as f64) / (k as f64 + 1.0);
    }
    out
}

impl Jet {
    pub fn scale(mut self, s: f64) -> Jet {
        for c in &mut self.coeffs {
            *c *= s;
        }
        self
    }

    pub fn square(&self) -> Jet {
        mul_jets(self, self)
    }

    /// `1 / self`; a zero value yields non-finite coefficients, which the
    /// metric layer reports. Use [`Jet::try_recip`] for a checked version.
    pub fn recip(&self) -> Jet {
        let a = self.value();
        let taylor: Vec<f64> = (0..=self.order())
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } / a.powi(k as i32 + 1))
            .collect();
        self.compose_univariate(&taylor)
    }

    pub fn try_recip(&self) -> Result<Jet, JetError> {
        if self.value() == 0.0 {
            return Err(JetError::Domain { op: "recip", value: 0.0 });
        }
        self.recip().check_finite("recip")
    }

    pub fn try_div(&self, other: &Jet) -> Result<Jet, JetError> {
        Ok(self * &other.try_recip()?)
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        let a = self.value();
        if a <= 0.0 || !a.is_finite() {
            return Err(JetError::Domain { op: "sqrt", value: a });
        }
        Ok(self.compose_univariate(&power_series(a, 0.5, self.order())))
    }

    /// Real power with positive base.
    pub fn powf(&self, p: f64) -> Result<Jet, JetError> {
        let a = self.value();
        if a <= 0.0 || !a.is_finite() {
            return Err(JetError::Domain { op: "powf", value: a });
        }
        Ok(self.compose_univariate(&power_series(a, p, self.order())))
    }

    pub fn powi(&self, p: u32) -> Jet {
        let mut out = Jet::constant(&self.space, 1.0);
        for _ in 0..p {
            out = &out * self;
        }
        out
    }

    pub fn exp(&self) -> Result<Jet, JetError> {
        let e = self.value().exp();
        if !e.is_finite() {
            return Err(JetError::Domain { op: "exp", value: self.value() });
        }
        let taylor: Vec<f64> = (0..=self.order()).map(|k| e / factorial(k)).collect();
        Ok(self.compose_univariate(&taylor))
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        let a = self.value();
        if a <= 0.0 || !a.is_finite() {
            return Err(JetError::Domain { op: "ln", value: a });
        }
        let mut taylor = vec![a.ln()];
        for k in 1..=self.order() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            taylor.push(sign / (k as f64 * a.powi(k as i32)));
        }
        Ok(self.compose_univariate(&taylor))
    }

    fn trig_series(a: f64, order: usize, cos_first: bool) -> Vec<f64> {
        // derivatives of sin cycle through sin, cos, -sin, -cos
        let (s, c) = a.sin_cos();
        let cycle = if cos_first { [c, -s, -c, s] } else { [s, c, -s, -c] };
        (0..=order).map(|k| cycle[k % 4] / factorial(k)).collect()
    }

    pub fn sin(&self) -> Result<Jet, JetError> {
        self.finite_arg("sin")?;
        Ok(self.compose_univariate(&Self::trig_series(self.value(), self.order(), false)))
    }

    pub fn cos(&self) -> Result<Jet, JetError> {
        self.finite_arg("cos")?;
        Ok(self.compose_univariate(&Self::trig_series(self.value(), self.order(), true)))
    }

    pub fn tan(&self) -> Result<Jet, JetError> {
        let c = self.cos()?;
        if c.value().abs() < 1e-300 {
            return Err(JetError::Domain { op: "tan", value: self.value() });
        }
        Ok(&self.sin()? / &c)
    }

    pub fn sinh(&self) -> Result<Jet, JetError> {
        self.finite_arg("sinh")?;
        let (s, c) = (self.value().sinh(), self.value().cosh());
        let taylor: Vec<f64> = (0..=self.order())
            .map(|k| if k % 2 == 0 { s } else { c } / factorial(k))
            .collect();
        Ok(self.compose_univariate(&taylor))
    }

    pub fn cosh(&self) -> Result<Jet, JetError> {
        self.finite_arg("cosh")?;
        let (s, c) = (self.value().sinh(), self.value().cosh());
        let taylor: Vec<f64> = (0..=self.order())
            .map(|k| if k % 2 == 0 { c } else { s } / factorial(k))
            .collect();
        Ok(self.compose_univariate(&taylor))
    }

    pub fn atan(&self) -> Result<Jet, JetError> {
        self.finite_arg("atan")?;
        let a = self.value();
        let order = self.order();
        // 1/(1+z²) expanded at a: denominator q0 + q1 t + q2 t²
        let (q0, q1, q2) = (1.0 + a * a, 2.0 * a, 1.0);
        let mut r = vec![0.0; order.max(1)];
        for k in 0..r.len() {
            let mut acc = if k == 0 { 1.0 } else { 0.0 };
            if k >= 1 {
                acc -= q1 * r[k - 1];
            }
            if k >= 2 {
                acc -= q2 * r[k - 2];
            }
            r[k] = acc / q0;
        }
        let mut taylor = vec![a.atan()];
        for k in 1..=order {
            taylor.push(r[k - 1] / k as f64);
        }
        Ok(self.compose_univariate(&taylor))
    }

    fn finite_arg(&self, op: &'static str) -> Result<(), JetError> {
        if self.value().is_finite() {
            Ok(())
        } else {
            Err(JetError::Domain { op, value: self.value() })
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::jets::seed;

    #[test]
    fn sin_at_half_pi() {
        let x = &seed(&[std::f64::consts::FRAC_PI_2], 2).unwrap()[0];
        let s = x.sin().unwrap();
        assert!((s.value() - 1.0).abs() < 1e-15);
        assert!(s.partial(&[0]).abs() < 1e-15);
        assert!((s.partial(&[0, 0]) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn sqrt_at_four() {
        let x = &seed(&[4.0], 2).unwrap()[0];
        let s = x.sqrt().unwrap();
        assert_eq!(s.value(), 2.0);
        assert!((s.partial(&[0]) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn atan_at_one() {
        let x = &seed(&[1.0], 3).unwrap()[0];
        let s = x.atan().unwrap();
        assert!((s.partial(&[0]) - 0.5).abs() < 1e-15);
        // d²/dx² atan = -2x/(1+x²)² = -1/2 at x=1
        assert!((s.partial(&[0, 0]) + 0.5).abs() < 1e-14);
        // d³ = (6x²-2)/(1+x²)³ = 1/2
        assert!((s.partial(&[0, 0, 0]) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn domain_errors_are_reported() {
        let x = &seed(&[-1.0], 2).unwrap()[0];
        assert!(x.sqrt().is_err());
        assert!(x.ln().is_err());
        assert!(x.powf(0.3).is_err());
        let z = &seed(&[0.0], 2).unwrap()[0];
        assert!(z.try_recip().is_err());
    }

    #[test]
    fn division_inverts_multiplication() {
        let v = seed(&[1.3, -0.4], 4).unwrap();
        let a = &v[0] * &v[1] + 2.0;
        let b = v[0].exp().unwrap();
        let q = &(&a / &b) * &b;
        for (x, y) in q.coeffs().iter().zip(a.coeffs()) {
            assert!((x - y).abs() < 1e-13);
        }
    }
}
