use super::ode::{rk4, JetState};
use crate::error::Result;
use crate::hyper::{normal_field, CoOrientation, HypersurfacePatch, ParamDomain};
use crate::jets::{seed, Jet};
use crate::metrics::MetricSpec;
use crate::spray::spray_jets;
use std::sync::Arc;

/// The hypersurface `u ↦ exp(φ(u), s·n(u))` swept out by the normal geodesics
/// of `base` at distance `s`, computed on jets so that its own shape operator
/// can be taken directly. Hinted along the transported normal `γ̇(s)`.
#[derive(Debug, Clone)]
pub struct ParallelPatch {
    pub metric: MetricSpec,
    pub base: Arc<dyn HypersurfacePatch>,
    pub side: CoOrientation,
    pub distance: f64,
    /// RK4 steps over `[0, distance]`
    pub steps: usize,
}

impl ParallelPatch {
    pub fn new(metric: &MetricSpec, base: Arc<dyn HypersurfacePatch>, side: CoOrientation, distance: f64) -> Self {
        ParallelPatch {
            metric: metric.clone(),
            base,
            side,
            distance,
            steps: 200,
        }
    }

    /// `(x(s), y(s))` as jets in the space of `u`.
    fn flow(&self, u: &[Jet]) -> Result<(Vec<Jet>, Vec<Jet>)> {
        let n = self.metric.dim();
        let order = u[0].order();
        let u0: Vec<f64> = u.iter().map(Jet::value).collect();
        let (phi, nrm) = normal_field(&self.metric, self.base.as_ref(), &u0, self.side, order)?;
        let du: Vec<Jet> = u.iter().zip(&u0).map(|(a, b)| a - *b).collect();
        let mut z: Vec<Jet> = phi.iter().map(|p| p.compose(&du)).collect();
        z.extend(nrm.iter().map(|p| p.compose(&du)));
        let rhs = |_s: f64, st: &JetState| -> Result<JetState> {
            let vals: Vec<f64> = st.0.iter().map(Jet::value).collect();
            let g = spray_jets(&self.metric, &vals[..n], &vals[n..], order)?;
            let inc: Vec<Jet> = st.0.iter().zip(&vals).map(|(a, b)| a - *b).collect();
            let mut out: Vec<Jet> = st.0[n..].to_vec();
            out.extend(g.iter().map(|gi| gi.compose(&inc).scale(-2.0)));
            Ok(JetState(out))
        };
        let end = rk4(rhs, 0.0, JetState(z), self.distance, self.steps)?;
        let mut x = end.0;
        let y = x.split_off(n);
        Ok((x, y))
    }
}

impl HypersurfacePatch for ParallelPatch {
    fn name(&self) -> String {
        format!("parallel({}, s={})", self.base.name(), self.distance)
    }
    fn ambient_dim(&self) -> usize {
        self.base.ambient_dim()
    }
    fn param_dim(&self) -> usize {
        self.base.param_dim()
    }
    fn domain(&self) -> ParamDomain {
        self.base.domain()
    }
    fn eval(&self, u: &[Jet]) -> Result<Vec<Jet>> {
        Ok(self.flow(u)?.0)
    }
    fn orientation(&self, u: &[f64], _x: &[f64]) -> Vec<f64> {
        match seed(u, 1).map_err(Into::into).and_then(|uj| self.flow(&uj)) {
            Ok((_, y)) => y.iter().map(Jet::value).collect(),
            Err(_) => vec![0.0; self.ambient_dim()],
        }
    }
}
