//! Dormand–Prince 5(4) with cubic Hermite dense output, sign-change events
//! and a stop predicate; plus classical RK4 over arbitrary vector spaces.

use crate::error::{FinslerError, Result};
use std::ops::{Add, Mul};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-9,
            atol: 1e-12,
            h0: 1e-3,
            h_min: 1e-14,
            h_max: 0.1,
            max_steps: 200_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions {
            rtol: tol,
            atol: tol * 1e-3,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Completed,
    /// Terminal event located at `s`.
    Event(f64),
    /// The stop predicate fired after the step ending at `s`.
    Stopped(f64),
    /// Step size fell below `h_min` at `s`.
    StepUnderflow(f64),
}

/// Accepted nodes with derivatives, for Hermite interpolation.
#[derive(Debug, Clone)]
pub struct Solution {
    pub s: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub dy: Vec<Vec<f64>>,
    pub termination: Termination,
}

impl Solution {
    pub fn last(&self) -> (f64, &[f64]) {
        (*self.s.last().unwrap(), self.y.last().unwrap())
    }

    /// Cubic Hermite interpolant; clamps to the covered interval.
    pub fn interpolate(&self, s: f64) -> Vec<f64> {
        let n = self.s.len();
        if s <= self.s[0] || n == 1 {
            return self.y[0].clone();
        }
        if s >= self.s[n - 1] {
            return self.y[n - 1].clone();
        }
        let i = match self.s.binary_search_by(|v| v.total_cmp(&s)) {
            Ok(i) => return self.y[i].clone(),
            Err(i) => i - 1,
        };
        hermite(self.s[i], &self.y[i], &self.dy[i], self.s[i + 1], &self.y[i + 1], &self.dy[i + 1], s)
    }
}

fn hermite(s0: f64, y0: &[f64], f0: &[f64], s1: f64, y1: &[f64], f1: &[f64], s: f64) -> Vec<f64> {
    let h = s1 - s0;
    let t = (s - s0) / h;
    let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
    let h10 = t * (1.0 - t) * (1.0 - t);
    let h01 = t * t * (3.0 - 2.0 * t);
    let h11 = t * t * (t - 1.0);
    (0..y0.len())
        .map(|k| h00 * y0[k] + h10 * h * f0[k] + h01 * y1[k] + h11 * h * f1[k])
        .collect()
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Scalar event function `g(s, y)`; a terminal event fires at the first
/// strict sign change across an accepted step.
pub type EventFn<'a> = &'a dyn Fn(f64, &[f64]) -> f64;
pub type StopFn<'a> = &'a dyn Fn(f64, &[f64]) -> bool;

/// Integrates `y' = f(s, y)` from `s0` to `s_end > s0`. Evaluation errors
/// inside a step shrink the step; if that underflows the error is returned
/// with the last accepted `s`.
pub fn integrate(
    mut f: impl FnMut(f64, &[f64]) -> Result<Vec<f64>>,
    s0: f64,
    y0: &[f64],
    s_end: f64,
    opts: &OdeOptions,
    event: Option<EventFn<'_>>,
    stop: Option<StopFn<'_>>,
) -> Result<Solution> {
    let n = y0.len();
    let mut s = s0;
    let mut y = y0.to_vec();
    let mut k1 = f(s, &y)?;
    let mut sol = Solution {
        s: vec![s],
        y: vec![y.clone()],
        dy: vec![k1.clone()],
        termination: Termination::Completed,
    };
    let mut g_prev = event.map(|g| g(s, &y));
    let mut h = opts.h0.min(s_end - s0).min(opts.h_max);
    let mut last_err: Option<FinslerError> = None;
    for _ in 0..opts.max_steps {
        if s >= s_end {
            return Ok(sol);
        }
        if h < opts.h_min {
            if let Some(e) = last_err {
                return Err(FinslerError::Integration {
                    s,
                    reason: e.to_string(),
                });
            }
            sol.termination = Termination::StepUnderflow(s);
            return Ok(sol);
        }
        let h_step = h.min(s_end - s);
        let attempt = (|| -> Result<(Vec<f64>, Vec<f64>, f64)> {
            let mut k: Vec<Vec<f64>> = vec![k1.clone()];
            for stage in 1..7 {
                let yi: Vec<f64> = (0..n)
                    .map(|c| y[c] + h_step * (0..stage).map(|j| A[stage][j] * k[j][c]).sum::<f64>())
                    .collect();
                let ki = f(s + C[stage] * h_step, &yi)?;
                if ki.iter().any(|v| !v.is_finite()) {
                    return Err(FinslerError::Integration {
                        s: s + C[stage] * h_step,
                        reason: "non-finite derivative".to_string(),
                    });
                }
                k.push(ki);
            }
            let y5: Vec<f64> = (0..n).map(|c| y[c] + h_step * (0..7).map(|j| B5[j] * k[j][c]).sum::<f64>()).collect();
            let mut err = 0.0f64;
            for c in 0..n {
                let y4 = y[c] + h_step * (0..7).map(|j| B4[j] * k[j][c]).sum::<f64>();
                let sc = opts.atol + opts.rtol * y[c].abs().max(y5[c].abs());
                err = err.max(((y5[c] - y4) / sc).abs());
            }
            Ok((y5, k.pop().unwrap(), err))
        })();
        let (y_new, k_last, err) = match attempt {
            Ok(v) => v,
            Err(e) => {
                last_err = Some(e);
                h *= 0.25;
                continue;
            }
        };
        if !(err <= 1.0) {
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.5) } else { 0.1 };
            h *= fac;
            continue;
        }
        last_err = None;
        let s_new = s + h_step;
        if let (Some(g), Some(gp)) = (event, g_prev) {
            let gn = g(s_new, &y_new);
            if gp * gn < 0.0 {
                let (mut a, mut b) = (s, s_new);
                let mut ga = gp;
                for _ in 0..200 {
                    if b - a <= 1e-14 * b.abs().max(1.0) {
                        break;
                    }
                    let m = 0.5 * (a + b);
                    let ym = hermite(s, &y, &k1, s_new, &y_new, &k_last, m);
                    let gm = g(m, &ym);
                    if gm * ga > 0.0 {
                        a = m;
                        ga = gm;
                    } else {
                        b = m;
                    }
                }
                let se = 0.5 * (a + b);
                let ye = hermite(s, &y, &k1, s_new, &y_new, &k_last, se);
                let fe = f(se, &ye)?;
                sol.s.push(se);
                sol.y.push(ye);
                sol.dy.push(fe);
                sol.termination = Termination::Event(se);
                return Ok(sol);
            }
            g_prev = Some(gn);
        }
        s = s_new;
        y = y_new;
        k1 = k_last;
        sol.s.push(s);
        sol.y.push(y.clone());
        sol.dy.push(k1.clone());
        if let Some(st) = stop {
            if st(s, &y) {
                sol.termination = Termination::Stopped(s);
                return Ok(sol);
            }
        }
        let fac = if err > 0.0 { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) } else { 5.0 };
        h = (h_step * fac).min(opts.h_max);
    }
    Err(FinslerError::Integration {
        s,
        reason: format!("exceeded {} steps", opts.max_steps),
    })
}

/// Classical fixed-step RK4 over any state supporting `+` and scalar `*`
/// (used for jet-valued states).
pub fn rk4<T>(mut f: impl FnMut(f64, &T) -> Result<T>, s0: f64, y0: T, s_end: f64, steps: usize) -> Result<T>
where
    T: Clone,
    for<'a> &'a T: Add<&'a T, Output = T> + Mul<f64, Output = T>,
{
    let h = (s_end - s0) / steps as f64;
    let mut y = y0;
    let mut s = s0;
    for _ in 0..steps {
        let k1 = f(s, &y)?;
        let k2 = f(s + 0.5 * h, &(&y + &(&k1 * (0.5 * h))))?;
        let k3 = f(s + 0.5 * h, &(&y + &(&k2 * (0.5 * h))))?;
        let k4 = f(s + h, &(&y + &(&k3 * h)))?;
        let incr = &(&(&k1 + &(&k2 * 2.0)) + &(&(&k3 * 2.0) + &k4)) * (h / 6.0);
        y = &y + &incr;
        s += h;
    }
    Ok(y)
}

/// Vector of jets usable as an [`rk4`] state.
#[derive(Debug, Clone)]
pub struct JetState(pub Vec<crate::jets::Jet>);

impl<'a> Add<&'a JetState> for &'a JetState {
    type Output = JetState;
    fn add(self, o: &'a JetState) -> JetState {
        JetState(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
}

impl<'a> Mul<f64> for &'a JetState {
    type Output = JetState;
    fn mul(self, s: f64) -> JetState {
        JetState(self.0.iter().map(|a| a.clone().scale(s)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_and_event() {
        let g = |_s: f64, y: &[f64]| y[0];
        let sol = integrate(
            |_s, y| Ok(vec![y[1], -y[0]]),
            0.0,
            &[0.0, 1.0],
            10.0,
            &OdeOptions::with_tol(1e-11),
            Some(&g),
            None,
        )
        .unwrap();
        match sol.termination {
            Termination::Event(s) => assert!((s - std::f64::consts::PI).abs() < 1e-9, "{s}"),
            t => panic!("{t:?}"),
        }
        let mid = sol.interpolate(1.0);
        assert!((mid[0] - 1f64.sin()).abs() < 1e-7);
    }

    #[test]
    fn blow_up_is_stopped() {
        let stop = |_s: f64, y: &[f64]| y[0].abs() > 1e8;
        let sol = integrate(|_s, y| Ok(vec![y[0] * y[0]]), 0.0, &[1.0], 2.0, &OdeOptions::default(), None, Some(&stop)).unwrap();
        let (s, y) = sol.last();
        assert!(matches!(sol.termination, Termination::Stopped(_) | Termination::StepUnderflow(_)));
        assert!((s + 1.0 / y[0] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn rk4_on_jets() {
        use crate::jets::seed;
        let y0 = JetState(seed(&[1.0], 2).unwrap());
        // y' = y, y(0) = y0 ⇒ y(1) = e·y0, so dy(1)/dy0 = e
        let y1 = rk4(|_s, y: &JetState| Ok(y.clone()), 0.0, y0, 1.0, 200).unwrap();
        assert!((y1.0[0].partial(&[0]) - std::f64::consts::E).abs() < 1e-9);
    }
}
