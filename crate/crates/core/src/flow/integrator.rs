//! Dormand–Prince 5(4) with PI step-size control.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            h_init: 1e-2,
            h_min: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err("tolerances must be positive".into());
        }
        if !(self.h_min > 0.0 && self.h_min <= self.h_init) {
            return Err("need 0 < h_min <= h_init".into());
        }
        if self.max_steps == 0 {
            return Err("max_steps must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum StepFailure<E> {
    Rhs(E),
    MaxSteps(usize),
    Underflow { t: f64, h: f64 },
}

impl<E> From<E> for StepFailure<E> {
    fn from(e: E) -> Self {
        StepFailure::Rhs(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Solution {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub accepted: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights equal the last row of A (FSAL)
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const ALPHA: f64 = 0.17;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Integrates `dy/dt = rhs(t, y)` from `t0` to `t1` (either direction).
///
/// `max_dy(y)` optionally caps the Euclidean length of a single step; a step
/// exceeding it is rejected and halved regardless of its error estimate.
pub(crate) fn dopri5<E, F, G>(
    mut rhs: F,
    max_dy: G,
    t0: f64,
    t1: f64,
    y0: &[f64],
    settings: &IntegratorSettings,
) -> Result<Solution, StepFailure<E>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>, E>,
    G: Fn(&[f64]) -> Option<f64>,
{
    let n = y0.len();
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut sol = Solution {
        t: vec![t0],
        y: vec![y0.to_vec()],
        accepted: 0,
        rejected: 0,
    };
    if span == 0.0 {
        return Ok(sol);
    }
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = settings.h_init.min(span);
    let mut err_prev: f64 = 1e-4;
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    k[0] = rhs(t, &y)?;
    let mut stage = vec![0.0; n];

    loop {
        if sol.accepted + sol.rejected >= settings.max_steps {
            return Err(StepFailure::MaxSteps(settings.max_steps));
        }
        let remaining = (t1 - t).abs();
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let hs = dir * h;
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                stage[i] = y[i] + hs * acc;
            }
            k[s] = rhs(t + C[s] * hs, &stage)?;
        }
        // stage now holds the fifth-order solution (row 6 of A)
        let y_new = stage.clone();
        let mut err = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            let sc = settings.abs_tol + settings.rel_tol * y[i].abs().max(y_new[i].abs());
            err += (hs * e / sc).powi(2);
        }
        let err = (err / n.max(1) as f64).sqrt();

        let too_long = max_dy(&y).is_some_and(|cap| {
            let dy = y.iter().zip(&y_new).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            dy > cap
        });

        if err <= 1.0 && !too_long {
            sol.accepted += 1;
            t = if last { t1 } else { t + hs };
            y = y_new;
            sol.t.push(t);
            sol.y.push(y.clone());
            if last {
                return Ok(sol);
            }
            k[0] = k[6].clone();
            let fac = if err == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err.powf(-ALPHA) * err_prev.powf(BETA)).clamp(FAC_MIN, FAC_MAX)
            };
            err_prev = err.max(1e-4);
            h *= fac;
        } else {
            sol.rejected += 1;
            let fac = if too_long {
                0.5
            } else {
                (SAFETY * err.powf(-ALPHA)).clamp(FAC_MIN, 1.0)
            };
            h *= fac;
            if h < settings.h_min {
                return Err(StepFailure::Underflow { t, h });
            }
        }
    }
}
