//! Adaptive Dormand-Prince 5(4) integrator for fixed-size systems.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N];
}

impl<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]> OdeSystem<N> for F {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N] {
        self(t, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Steps never exceed `max_step_ratio * t`.
    pub max_step_ratio: f64,
}

/// Returned by the observer after each accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// difference between the 5th and embedded 4th order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = rhs(t, y)` from `t0` to `t_end > t0`.
///
/// `observe` sees the initial state and every accepted step; returning
/// [`Flow::Stop`] ends the integration early. Returns the last time reached.
pub fn integrate<const N: usize, S, O>(
    system: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    control: StepControl,
    mut observe: O,
) -> Result<f64>
where
    S: OdeSystem<N>,
    O: FnMut(f64, &[f64; N]) -> Flow,
{
    let mut t = t0;
    let mut y = y0;
    if observe(t, &y) == Flow::Stop {
        return Ok(t);
    }
    let mut k = [[0.0; N]; 7];
    k[0] = system.rhs(t, &y);
    let mut h = 1e-2 * control.max_step_ratio * t0.abs().max(f64::MIN_POSITIVE);
    let mut rejected = false;

    while t < t_end {
        h = h.min(control.max_step_ratio * t.abs().max(t0.abs())).min(t_end - t);
        if h < 1e-14 * t.abs().max(1e-300) {
            return Err(Error::Integration {
                r: t,
                reason: "step size underflow",
            });
        }
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[s] = system.rhs(t + C[s] * h, &ys);
        }
        let mut y_new = y;
        for i in 0..N {
            y_new[i] += h * (0..6).map(|s| A[6][s] * k[s][i]).sum::<f64>();
        }
        let mut err2 = 0.0;
        for i in 0..N {
            let e = h * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>();
            let scale = control.abs_tol + control.rel_tol * y[i].abs().max(y_new[i].abs());
            err2 += (e / scale) * (e / scale);
        }
        let err = (err2 / N as f64).sqrt();
        if !err.is_finite() || y_new.iter().any(|x| !x.is_finite()) {
            if h < 1e-12 * t.abs() {
                return Err(Error::Integration {
                    r: t,
                    reason: "non-finite state",
                });
            }
            h *= 0.25;
            rejected = true;
            continue;
        }
        if err <= 1.0 {
            t += h;
            y = y_new;
            // first-same-as-last
            k[0] = k[6];
            if observe(t, &y) == Flow::Stop {
                return Ok(t);
            }
            let grow = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= if rejected { grow.min(1.0) } else { grow };
            rejected = false;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            rejected = true;
        }
    }
    Ok(t)
}
