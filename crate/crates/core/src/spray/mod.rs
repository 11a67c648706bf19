//! Geodesic spray, Berwald connection and curvature.
//!
//! Everything is assembled from jets of `F²` in the `2n` variables
//! `(x¹..xⁿ, y¹..yⁿ)`: `G^i` is built as a jet and then differentiated further,
//! so each quantity costs exactly one `F²` expansion of the order listed in
//! the [`crate::jets`] budget table.

use crate::error::{FinslerError, Result};
use crate::jets::{inverse, seed, seed_pair, Jet, JetSpace};
use crate::metrics::{Density, MetricSpec};
use nalgebra::DMatrix;

/// `G^i`, `N^i_j = ∂G^i/∂y^j` and `Γ^i_jk = ∂²G^i/∂y^j∂y^k` at one `(x, y)`.
#[derive(Debug, Clone)]
pub struct SprayData {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub g: Vec<f64>,
    /// `n[(i, j)] = N^i_j`
    pub n: DMatrix<f64>,
    /// `gamma[i][(j, k)] = Γ^i_jk`
    pub gamma: Vec<DMatrix<f64>>,
}

impl SprayData {
    fn zero(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        SprayData {
            x: x.to_vec(),
            y: y.to_vec(),
            g: vec![0.0; n],
            n: DMatrix::zeros(n, n),
            gamma: vec![DMatrix::zeros(n, n); n],
        }
    }

    /// `Γ^i_jk a^j b^k` for each `i`.
    pub fn contract(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        self.gamma
            .iter()
            .map(|gi| {
                let mut s = 0.0;
                for (j, aj) in a.iter().enumerate() {
                    for (k, bk) in b.iter().enumerate() {
                        s += gi[(j, k)] * aj * bk;
                    }
                }
                s
            })
            .collect()
    }
}

/// Dense four-index array `T^i_{jkl}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Tensor4 {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.idx(i, j, k, l)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let ix = self.idx(i, j, k, l);
        self.data[ix] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Curvature at one `(x, y)`; `p` is filled only by [`p_tensor`].
#[derive(Debug, Clone)]
pub struct CurvatureData {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `r_mixed[(i, k)] = R^i_k`
    pub r_mixed: DMatrix<f64>,
    /// `r_lowered[(j, k)] = g_ij R^i_k`
    pub r_lowered: DMatrix<f64>,
    pub p: Option<Tensor4>,
}

fn check_nonzero(metric: &MetricSpec, x: &[f64], y: &[f64]) -> Result<()> {
    metric.check_point(x)?;
    if y.len() != metric.dim() {
        return Err(FinslerError::Dimension {
            expected: metric.dim(),
            got: y.len(),
        });
    }
    if y.iter().all(|v| *v == 0.0) {
        return Err(FinslerError::domain(metric.name(), "zero vector"));
    }
    Ok(())
}

/// `G^i = ¼ g^{il} ([F²]_{x^k y^l} y^k − [F²]_{x^l})` as jets of order
/// `order` in `(x, y)` about `(x, y)`.
pub fn spray_jets(metric: &MetricSpec, x: &[f64], y: &[f64], order: usize) -> Result<Vec<Jet>> {
    check_nonzero(metric, x, y)?;
    let n = metric.dim();
    let k = order + 2;
    let (xs, ys) = seed_pair(x, y, k)?;
    if metric.is_minkowski() {
        let space = JetSpace::get(2 * n, order);
        return Ok((0..n).map(|_| Jet::zero(&space)).collect());
    }
    let f2 = metric.norm_jet(&xs, &ys)?.square();
    let fy: Vec<Jet> = (0..n).map(|l| f2.diff(n + l)).collect();
    let g: Vec<Vec<Jet>> = (0..n)
        .map(|i| (0..n).map(|l| fy[l].diff(n + i).scale(0.5)).collect())
        .collect();
    let g_inv = inverse(&g).map_err(|_| FinslerError::Singular {
        what: format!("fundamental tensor of {} at x={x:?}, y={y:?}", metric.name()),
    })?;
    let yt: Vec<Jet> = ys.iter().map(|v| v.truncate(order)).collect();
    let mut rhs = Vec::with_capacity(n);
    for l in 0..n {
        let mut a = f2.diff(l).truncate(order).scale(-1.0);
        for (kk, yk) in yt.iter().enumerate() {
            a = a + &fy[l].diff(kk) * yk;
        }
        rhs.push(a);
    }
    let mut out = Vec::with_capacity(n);
    for row in g_inv.iter() {
        let mut gi = Jet::zero(rhs[0].space());
        for (gil, al) in row.iter().zip(&rhs) {
            gi = gi + gil * al;
        }
        out.push(gi.scale(0.25));
    }
    Ok(out)
}

/// Geodesic coefficients only (cheapest path, used by integrators).
pub fn spray_vector(metric: &MetricSpec, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    if metric.is_minkowski() {
        check_nonzero(metric, x, y)?;
        return Ok(vec![0.0; metric.dim()]);
    }
    Ok(spray_jets(metric, x, y, 0)?.iter().map(Jet::value).collect())
}

fn spray_from_jets(x: &[f64], y: &[f64], gj: &[Jet]) -> SprayData {
    let n = x.len();
    let mut sd = SprayData::zero(x, y);
    for i in 0..n {
        sd.g[i] = gj[i].value();
        for j in 0..n {
            sd.n[(i, j)] = gj[i].partial(&[n + j]);
            for k in 0..n {
                sd.gamma[i][(j, k)] = gj[i].partial(&[n + j, n + k]);
            }
        }
    }
    sd
}

/// `G`, `N` and `Γ` at `(x, y)`.
pub fn geodesic_coefficients(metric: &MetricSpec, x: &[f64], y: &[f64]) -> Result<SprayData> {
    check_nonzero(metric, x, y)?;
    if metric.is_minkowski() {
        return Ok(SprayData::zero(x, y));
    }
    let gj = spray_jets(metric, x, y, 2)?;
    Ok(spray_from_jets(x, y, &gj))
}

/// `N^i_j` together with `G` (order-1 spray jets).
pub fn nonlinear_connection(metric: &MetricSpec, x: &[f64], y: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    check_nonzero(metric, x, y)?;
    let n = metric.dim();
    if metric.is_minkowski() {
        return Ok((vec![0.0; n], DMatrix::zeros(n, n)));
    }
    let gj = spray_jets(metric, x, y, 1)?;
    let g = gj.iter().map(Jet::value).collect();
    let nm = DMatrix::from_fn(n, n, |i, j| gj[i].partial(&[n + j]));
    Ok((g, nm))
}

fn lower(metric: &MetricSpec, x: &[f64], y: &[f64], r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let fund = metric.fundamental_tensor(x, y)?;
    Ok(fund.g.transpose() * r)
}

/// Berwald curvature contracted with `y`, `R^i_k = y^j R^i_{jkl} y^l`, with
/// `R^i_{jkl} = δ_kΓ^i_jl − δ_lΓ^i_jk + Γ^i_kmΓ^m_jl − Γ^i_lmΓ^m_jk` and
/// `δ_k = ∂_{x^k} − N^m_k ∂_{y^m}`.
pub fn riemann_curvature(metric: &MetricSpec, x: &[f64], y: &[f64]) -> Result<CurvatureData> {
    riemann_impl(metric, x, y, false)
}

/// Curvature together with `P^i_{jkl} = −F ∂Γ^i_jk/∂y^l`.
pub fn p_tensor(metric: &MetricSpec, x: &[f64], y: &[f64]) -> Result<CurvatureData> {
    riemann_impl(metric, x, y, true)
}

fn riemann_impl(metric: &MetricSpec, x: &[f64], y: &[f64], with_p: bool) -> Result<CurvatureData> {
    check_nonzero(metric, x, y)?;
    let n = metric.dim();
    if metric.is_minkowski() {
        return Ok(CurvatureData {
            x: x.to_vec(),
            y: y.to_vec(),
            r_mixed: DMatrix::zeros(n, n),
            r_lowered: DMatrix::zeros(n, n),
            p: with_p.then(|| Tensor4::zeros(n)),
        });
    }
    let gj = spray_jets(metric, x, y, 3)?;
    let sd = spray_from_jets(x, y, &gj);
    let dx_gamma = |i: usize, j: usize, l: usize, k: usize| gj[i].partial(&[k, n + j, n + l]);
    let dy_gamma = |i: usize, j: usize, l: usize, m: usize| gj[i].partial(&[n + m, n + j, n + l]);
    let delta = |i: usize, j: usize, l: usize, k: usize| {
        let mut v = dx_gamma(i, j, l, k);
        for m in 0..n {
            v -= sd.n[(m, k)] * dy_gamma(i, j, l, m);
        }
        v
    };
    let mut r = DMatrix::zeros(n, n);
    for i in 0..n {
        for k in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                for l in 0..n {
                    let w = y[j] * y[l];
                    if w == 0.0 {
                        continue;
                    }
                    let mut t = delta(i, j, l, k) - delta(i, j, k, l);
                    for m in 0..n {
                        t += sd.gamma[i][(k, m)] * sd.gamma[m][(j, l)] - sd.gamma[i][(l, m)] * sd.gamma[m][(j, k)];
                    }
                    s += w * t;
                }
            }
            r[(i, k)] = s;
        }
    }
    let p = if with_p {
        let f = metric.norm(x, y)?;
        let mut p = Tensor4::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        p.set(i, j, k, l, -f * dy_gamma(i, j, k, l));
                    }
                }
            }
        }
        Some(p)
    } else {
        None
    };
    let r_lowered = lower(metric, x, y, &r)?;
    Ok(CurvatureData {
        x: x.to_vec(),
        y: y.to_vec(),
        r_mixed: r,
        r_lowered,
        p,
    })
}

/// Second assembly of `R^i_k` from the spray alone,
/// `2∂_kG^i − y^j ∂²_{x^j y^k}G^i + 2G^jΓ^i_jk − N^i_jN^j_k`; a cross-check
/// on [`riemann_curvature`].
pub fn riemann_curvature_spray_identity(metric: &MetricSpec, x: &[f64], y: &[f64]) -> Result<DMatrix<f64>> {
    Ok(connection_and_curvature(metric, x, y)?.2)
}

/// `(G, N, R^i_k)` from a single order-2 spray expansion via the spray
/// identity; the cheap path for integrators that need all three.
pub fn connection_and_curvature(metric: &MetricSpec, x: &[f64], y: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>, DMatrix<f64>)> {
    check_nonzero(metric, x, y)?;
    let n = metric.dim();
    if metric.is_minkowski() {
        return Ok((vec![0.0; n], DMatrix::zeros(n, n), DMatrix::zeros(n, n)));
    }
    let gj = spray_jets(metric, x, y, 2)?;
    let sd = spray_from_jets(x, y, &gj);
    let r = DMatrix::from_fn(n, n, |i, k| {
        let mut v = 2.0 * gj[i].partial(&[k]);
        for j in 0..n {
            v -= y[j] * gj[i].partial(&[j, n + k]);
            v += 2.0 * sd.g[j] * sd.gamma[i][(j, k)];
            v -= sd.n[(i, j)] * sd.n[(j, k)];
        }
        v
    });
    Ok((sd.g, sd.n, r))
}

/// `K(y, v) = R_jk v^j v^k / F²` after `g_y`-orthonormalising `v` against `y`.
pub fn flag_curvature(metric: &MetricSpec, x: &[f64], y: &[f64], v: &[f64]) -> Result<f64> {
    let curv = riemann_curvature(metric, x, y)?;
    let fund = metric.fundamental_tensor(x, y)?;
    let f2 = fund.inner(y, y);
    let proj = fund.inner(y, v) / f2;
    let w: Vec<f64> = v.iter().zip(y).map(|(a, b)| a - proj * b).collect();
    let ww = fund.inner(&w, &w);
    let vv = fund.inner(v, v);
    if !(ww > 1e-20 * vv.max(f64::MIN_POSITIVE)) {
        return Err(FinslerError::Degenerate);
    }
    let mut s = 0.0;
    for j in 0..x.len() {
        for k in 0..x.len() {
            s += curv.r_lowered[(j, k)] * w[j] * w[k];
        }
    }
    Ok(s / ww / f2)
}

/// `S(x, y) = ∂G^i/∂y^i − y^i ∂_{x^i} ln σ(x)`.
pub fn s_curvature(metric: &MetricSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    check_nonzero(metric, x, y)?;
    let n = metric.dim();
    let div = if metric.is_minkowski() {
        0.0
    } else {
        let (_, nm) = nonlinear_connection(metric, x, y)?;
        nm.trace()
    };
    let drift = match metric.density() {
        Density::None => return Err(FinslerError::MissingDensity(metric.name().to_string())),
        Density::Constant(_) => 0.0,
        Density::Analytic => {
            let xs = seed(x, 1)?;
            let sigma = metric.density_jet(&xs)?;
            let ln = sigma.ln()?;
            (0..n).map(|i| y[i] * ln.partial(&[i])).sum()
        }
    };
    Ok(div - drift)
}
