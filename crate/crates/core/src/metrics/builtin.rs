use super::parse::{Param, Value};
use super::{bh_volume_density, Density, MetricModel, MetricSpec};
use crate::error::{FinslerError, Result};
use crate::jets::Jet;
use std::sync::Arc;

fn sum_sq(v: &[Jet]) -> Jet {
    let mut acc = Jet::zero(v[0].space());
    for a in v {
        acc = &acc + &a.square();
    }
    acc
}

fn dot_const(b: &[f64], y: &[Jet]) -> Jet {
    let mut acc = Jet::zero(y[0].space());
    for (bi, yi) in b.iter().zip(y) {
        acc.axpy(*bi, yi);
    }
    acc
}

#[derive(Debug, Clone)]
pub struct Euclidean {
    pub n: usize,
}

impl MetricModel for Euclidean {
    fn dim(&self) -> usize {
        self.n
    }
    fn has_primal(&self) -> bool {
        true
    }
    fn primal(&self, _x: &[Jet], y: &[Jet]) -> Result<Jet> {
        Ok(sum_sq(y).sqrt()?)
    }
    fn is_minkowski(&self) -> bool {
        true
    }
}

/// Round sphere of curvature `c` in the stereographic chart,
/// `g = 4δ / (1 + c|x|²)²`.
#[derive(Debug, Clone)]
pub struct RiemannianSphere {
    pub n: usize,
    pub c: f64,
}

impl RiemannianSphere {
    fn conformal(&self, x: &[Jet]) -> Jet {
        sum_sq(x).scale(self.c) + 1.0
    }
}

impl MetricModel for RiemannianSphere {
    fn dim(&self) -> usize {
        self.n
    }
    fn sphere_chart(&self) -> Option<f64> {
        Some(self.c)
    }
    fn has_primal(&self) -> bool {
        true
    }
    fn primal(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        let norm = sum_sq(y).sqrt()?;
        Ok((norm * 2.0).try_div(&self.conformal(x))?)
    }
    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.iter().all(|v| v.is_finite()) && x.iter().map(|v| v * v).sum::<f64>() < 1e12 {
            Ok(())
        } else {
            Err(FinslerError::domain("riemannian_sphere", "point at the excluded chart pole"))
        }
    }
    fn has_density(&self) -> bool {
        true
    }
    fn density(&self, x: &[Jet]) -> Option<Result<Jet>> {
        // √det g = (2 / (1 + c|x|²))^n
        Some(
            self.conformal(x)
                .powf(-(self.n as f64))
                .map(|j| j.scale(2f64.powi(self.n as i32)))
                .map_err(Into::into),
        )
    }
}

/// `F = |y| + ⟨b, y⟩` with constant `b`, `|b| < 1`.
#[derive(Debug, Clone)]
pub struct Randers {
    pub b: Vec<f64>,
}

impl MetricModel for Randers {
    fn dim(&self) -> usize {
        self.b.len()
    }
    fn has_primal(&self) -> bool {
        true
    }
    fn primal(&self, _x: &[Jet], y: &[Jet]) -> Result<Jet> {
        Ok(sum_sq(y).sqrt()? + dot_const(&self.b, y))
    }
    fn is_minkowski(&self) -> bool {
        true
    }
}

/// Randers metric with position-dependent drift
/// `b(x) = eps · (sin x², ½ cos x¹, 0, …)`; a non-Berwald test subject.
#[derive(Debug, Clone)]
pub struct RandersShear {
    pub n: usize,
    pub eps: f64,
}

impl RandersShear {
    fn drift(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let space = x[0].space();
        let mut b: Vec<Jet> = (0..self.n).map(|_| Jet::zero(space)).collect();
        b[0] = x[1].sin()?.scale(self.eps);
        b[1] = x[0].cos()?.scale(0.5 * self.eps);
        Ok(b)
    }
}

impl MetricModel for RandersShear {
    fn dim(&self) -> usize {
        self.n
    }
    fn has_primal(&self) -> bool {
        true
    }
    fn primal(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        let b = self.drift(x)?;
        let mut beta = Jet::zero(y[0].space());
        for (bi, yi) in b.iter().zip(y) {
            beta = &beta + &(bi * yi);
        }
        Ok(sum_sq(y).sqrt()? + beta)
    }
    fn has_density(&self) -> bool {
        true
    }
    fn density(&self, x: &[Jet]) -> Option<Result<Jet>> {
        // Busemann–Hausdorff: (1 - |b|²)^((n+1)/2)
        let run = || -> Result<Jet> {
            let b = self.drift(x)?;
            let one_minus = 1.0 - sum_sq(&b);
            Ok(one_minus.powf((self.n as f64 + 1.0) / 2.0)?)
        };
        Some(run())
    }
}

/// Shape function of the conic Minkowski-(α,β) dual metric,
/// `φ(s) = √(b² − (1+a²)s²)/b − (a s / b)·arctan(√(b² − (1+a²)s²)/(a s))`.
pub fn conic_phi(a: f64, b: f64, s: &Jet) -> Result<Jet> {
    let rad = (b * b - s.square().scale(1.0 + a * a)).sqrt()?;
    let as_ = s.clone().scale(a);
    let ratio = rad.try_div(&as_)?;
    Ok(rad.scale(1.0 / b) - (as_ * ratio.atan()?).scale(1.0 / b))
}

/// Conic Minkowski metric on ℝ³ given through its dual
/// `F*(ξ) = |ξ| φ(b ξ₃ / |ξ|)`, defined on the cone
/// `ξ₁² + ξ₂² > a² ξ₃², ξ₃ ≠ 0`.
#[derive(Debug, Clone)]
pub struct ConicAB {
    pub a: f64,
    pub b: f64,
}

impl MetricModel for ConicAB {
    fn dim(&self) -> usize {
        3
    }
    fn has_dual(&self) -> bool {
        true
    }
    fn dual(&self, _x: &[Jet], xi: &[Jet]) -> Result<Jet> {
        let alpha = sum_sq(xi).sqrt()?;
        let s = xi[2].scale_ref(self.b).try_div(&alpha)?;
        Ok(alpha * conic_phi(self.a, self.b, &s)?)
    }
    fn check_dual(&self, _x: &[f64], xi: &[f64]) -> Result<()> {
        let horiz = xi[0] * xi[0] + xi[1] * xi[1];
        let norm = (horiz + xi[2] * xi[2]).sqrt();
        if xi[2].abs() <= 1e-12 * norm {
            return Err(FinslerError::domain("conic_ab", "ξ₃ = 0 (s = 0 excluded)"));
        }
        if horiz <= self.a * self.a * xi[2] * xi[2] {
            return Err(FinslerError::domain(
                "conic_ab",
                format!(
                    "ξ₁² + ξ₂² = {horiz:e} ≤ a²ξ₃² = {:e} (b² − (1+a²)s² ≤ 0)",
                    self.a * self.a * xi[2] * xi[2]
                ),
            ));
        }
        Ok(())
    }
    fn is_minkowski(&self) -> bool {
        true
    }
    fn newton_seed(&self, _x: &[f64], target: &[f64], dual_side: bool) -> Option<Vec<f64>> {
        if !dual_side {
            return None;
        }
        // pull the Euclidean raise into the domain cone; ∂F*/∂ξ₃ has the
        // sign opposite to ξ₃, so the vertical component flips
        let horiz = target[0].hypot(target[1]);
        let scale = target.iter().map(|v| v * v).sum::<f64>().sqrt();
        let sign = if target[2] < 0.0 { 1.0 } else { -1.0 };
        if horiz < 1e-3 * scale {
            return Some(vec![scale, 0.0, sign * 0.25 * scale / self.a]);
        }
        let cap = 0.5 * horiz / self.a;
        Some(vec![target[0], target[1], sign * target[2].abs().min(cap).max(1e-3 * cap)])
    }
}

/// Membership in `U = {ξ₁² + ξ₂² > 4a²ξ₃², ξ₃² > 0}`.
pub fn conic_extension_cone(a: f64, xi: &[f64]) -> bool {
    xi[2] != 0.0 && xi[0] * xi[0] + xi[1] * xi[1] > 4.0 * a * a * xi[2] * xi[2]
}

/// `F̃(y) = √(F̄²(y₁) + |y₂|²)` on `ℝᵏ × ℝᵐ`.
#[derive(Debug, Clone)]
pub struct Product {
    pub base: Arc<dyn MetricModel>,
    pub m: usize,
}

impl Product {
    fn split<'a>(&self, v: &'a [Jet]) -> (&'a [Jet], &'a [Jet]) {
        v.split_at(self.base.dim())
    }
}

impl MetricModel for Product {
    fn dim(&self) -> usize {
        self.base.dim() + self.m
    }
    fn has_primal(&self) -> bool {
        self.base.has_primal()
    }
    fn has_dual(&self) -> bool {
        self.base.has_dual()
    }
    fn primal(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        let (x1, _) = self.split(x);
        let (y1, y2) = self.split(y);
        let f1 = self.base.primal(x1, y1)?;
        let rest = if y2.is_empty() { Jet::zero(y[0].space()) } else { sum_sq(y2) };
        Ok((f1.square() + rest).sqrt()?)
    }
    fn dual(&self, x: &[Jet], xi: &[Jet]) -> Result<Jet> {
        let (x1, _) = self.split(x);
        let (xi1, xi2) = self.split(xi);
        let f1 = self.base.dual(x1, xi1)?;
        let rest = if xi2.is_empty() { Jet::zero(xi[0].space()) } else { sum_sq(xi2) };
        Ok((f1.square() + rest).sqrt()?)
    }
    fn check_point(&self, x: &[f64]) -> Result<()> {
        self.base.check_point(&x[..self.base.dim()])
    }
    fn check_primal(&self, x: &[f64], y: &[f64]) -> Result<()> {
        let k = self.base.dim();
        self.base.check_primal(&x[..k], &y[..k])
    }
    fn check_dual(&self, x: &[f64], xi: &[f64]) -> Result<()> {
        let k = self.base.dim();
        self.base.check_dual(&x[..k], &xi[..k])
    }
    fn is_minkowski(&self) -> bool {
        self.base.is_minkowski()
    }
}

/// `←F(x, y) = F(x, −y)`, `←F*(x, ξ) = F*(x, −ξ)`.
#[derive(Debug, Clone)]
pub struct Reversed {
    inner: Arc<dyn MetricModel>,
}

impl Reversed {
    pub fn new(inner: Arc<dyn MetricModel>) -> Self {
        Reversed { inner }
    }
}

fn negate(v: &[Jet]) -> Vec<Jet> {
    v.iter().map(|a| -a).collect()
}

fn negate_f(v: &[f64]) -> Vec<f64> {
    v.iter().map(|a| -a).collect()
}

impl MetricModel for Reversed {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn has_primal(&self) -> bool {
        self.inner.has_primal()
    }
    fn has_dual(&self) -> bool {
        self.inner.has_dual()
    }
    fn primal(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        self.inner.primal(x, &negate(y))
    }
    fn dual(&self, x: &[Jet], xi: &[Jet]) -> Result<Jet> {
        self.inner.dual(x, &negate(xi))
    }
    fn check_point(&self, x: &[f64]) -> Result<()> {
        self.inner.check_point(x)
    }
    fn check_primal(&self, x: &[f64], y: &[f64]) -> Result<()> {
        self.inner.check_primal(x, &negate_f(y))
    }
    fn check_dual(&self, x: &[f64], xi: &[f64]) -> Result<()> {
        self.inner.check_dual(x, &negate_f(xi))
    }
    fn is_minkowski(&self) -> bool {
        self.inner.is_minkowski()
    }
    fn density(&self, x: &[Jet]) -> Option<Result<Jet>> {
        self.inner.density(x)
    }
    fn has_density(&self) -> bool {
        self.inner.has_density()
    }
}

// ------------------------------------------------------------------ catalog

struct Args<'a> {
    metric: &'a str,
    params: &'a [Param],
}

impl<'a> Args<'a> {
    fn find(&self, key: &str, pos: usize) -> Option<&'a Value> {
        self.params
            .iter()
            .find(|p| p.key.as_deref() == Some(key))
            .or_else(|| self.params.iter().filter(|p| p.key.is_none()).nth(pos))
            .map(|p| &p.value)
    }

    fn invalid(&self, reason: impl Into<String>) -> FinslerError {
        FinslerError::InvalidParams {
            metric: self.metric.to_string(),
            reason: reason.into(),
        }
    }

    fn number(&self, key: &str, pos: usize) -> Result<Option<f64>> {
        match self.find(key, pos) {
            None => Ok(None),
            Some(Value::Number(v)) => Ok(Some(*v)),
            Some(other) => Err(self.invalid(format!("{key} must be a number, got {other:?}"))),
        }
    }

    fn count(&self, key: &str, pos: usize) -> Result<Option<usize>> {
        match self.number(key, pos)? {
            None => Ok(None),
            Some(v) if v >= 1.0 && v.fract() == 0.0 && v <= 8.0 => Ok(Some(v as usize)),
            Some(v) => Err(self.invalid(format!("{key} must be an integer in 1..=8, got {v}"))),
        }
    }

    fn list(&self, key: &str, pos: usize) -> Result<Option<Vec<f64>>> {
        match self.find(key, pos) {
            None => Ok(None),
            Some(Value::List(v)) => Ok(Some(v.clone())),
            Some(other) => Err(self.invalid(format!("{key} must be a list, got {other:?}"))),
        }
    }

    fn metric_arg(&self, key: &str, pos: usize) -> Result<MetricSpec> {
        match self.find(key, pos) {
            Some(Value::Metric(e)) => build(&e.name, &e.params),
            _ => Err(self.invalid(format!("{key} must be a metric expression"))),
        }
    }
}

fn fmt_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("[{}]", items.join(","))
}

fn with_bh(spec: MetricSpec) -> Result<MetricSpec> {
    let sigma = bh_volume_density(&spec)?;
    Ok(spec.with_density(Density::Constant(sigma)))
}

pub(super) fn build(name: &str, params: &[Param]) -> Result<MetricSpec> {
    let args = Args { metric: name, params };
    match name {
        "euclidean" => {
            let n = args.count("n", 0)?.ok_or_else(|| args.invalid("missing n"))?;
            with_bh(MetricSpec::new(format!("euclidean(n={n})"), Arc::new(Euclidean { n })))
        }
        "riemannian_sphere" => {
            let n = args.count("n", 0)?.ok_or_else(|| args.invalid("missing n"))?;
            let c = args.number("c", 1)?.unwrap_or(1.0);
            if !(c > 0.0 && c.is_finite()) {
                return Err(args.invalid(format!("curvature c must be positive, got {c}")));
            }
            Ok(MetricSpec::new(
                format!("riemannian_sphere(n={n},c={c})"),
                Arc::new(RiemannianSphere { n, c }),
            ))
        }
        "randers" => {
            let b = args
                .list("b", 1)?
                .or(args.list("b", 0)?)
                .ok_or_else(|| args.invalid("missing drift vector b"))?;
            if let Some(n) = args.count("n", 0)? {
                if n != b.len() {
                    return Err(args.invalid(format!("n = {n} but b has {} entries", b.len())));
                }
            }
            let norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            if b.is_empty() || !(norm < 1.0) {
                return Err(args.invalid(format!("need |b| < 1, got {norm}")));
            }
            with_bh(MetricSpec::new(format!("randers(b={})", fmt_list(&b)), Arc::new(Randers { b })))
        }
        "randers_shear" => {
            let n = args.count("n", 0)?.unwrap_or(2);
            let eps = args.number("eps", 1)?.unwrap_or(0.1);
            if n < 2 || !(eps.abs() < 0.8) {
                return Err(args.invalid("need n >= 2 and |eps| < 0.8"));
            }
            Ok(MetricSpec::new(
                format!("randers_shear(n={n},eps={eps})"),
                Arc::new(RandersShear { n, eps }),
            ))
        }
        "conic_ab" => {
            let a = args.number("a", 0)?.ok_or_else(|| args.invalid("missing a"))?;
            let b = args.number("b", 1)?.ok_or_else(|| args.invalid("missing b"))?;
            if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
                return Err(args.invalid(format!("need a, b > 0, got a={a}, b={b}")));
            }
            Ok(MetricSpec::new(format!("conic_ab(a={a},b={b})"), Arc::new(ConicAB { a, b })))
        }
        "product" => {
            let base = args.metric_arg("base", 0)?;
            let m = args.count("m", 1)?.ok_or_else(|| args.invalid("missing m"))?;
            let spec = MetricSpec::new(
                format!("product({},m={m})", base.name()),
                Arc::new(Product {
                    base: base.model().clone(),
                    m,
                }),
            );
            if base.is_minkowski() && base.has_primal() {
                with_bh(spec)
            } else {
                Ok(spec)
            }
        }
        "reverse" => {
            let inner = args.metric_arg("metric", 0)?;
            Ok(super::reverse_metric(&inner))
        }
        other => Err(FinslerError::InvalidParams {
            metric: other.to_string(),
            reason: "unknown metric family".to_string(),
        }),
    }
}

impl Jet {
    pub(crate) fn scale_ref(&self, s: f64) -> Jet {
        self.clone().scale(s)
    }
}
