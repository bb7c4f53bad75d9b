//! Dormand–Prince 5(4) integrator with step-size control.

use nalgebra::DVector;

use crate::error::{FinslerError, Result};
use crate::tolerances as tol;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub atol: f64,
    pub rtol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            atol: tol::ODE_ATOL,
            rtol: tol::ODE_RTOL,
            h_init: None,
            h_max: f64::INFINITY,
            h_min: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

/// Sampled trajectory. `stopped` carries the reason when integration ended early.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub y: Vec<DVector<f64>>,
    pub stopped: Option<String>,
    pub steps: usize,
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
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1` (forward, `t1 > t0`).
///
/// When `t_eval` is empty every accepted step is recorded; otherwise steps
/// are clamped to land on each requested time and only those are recorded.
/// `f` may fail or the `monitor` may return a reason; either ends the run
/// with the partial trajectory and `stopped` set.
pub fn dopri5<F, M>(
    mut f: F,
    t0: f64,
    y0: DVector<f64>,
    t1: f64,
    t_eval: &[f64],
    opts: &OdeOptions,
    mut monitor: M,
) -> Trajectory
where
    F: FnMut(f64, &DVector<f64>) -> Result<DVector<f64>>,
    M: FnMut(f64, &DVector<f64>) -> Option<String>,
{
    let mut out = Trajectory { t: vec![], y: vec![], stopped: None, steps: 0 };
    let record_all = t_eval.is_empty();
    let mut targets = t_eval.iter().copied().filter(|&s| s >= t0 && s <= t1).peekable();
    if record_all || targets.peek() == Some(&t0) {
        out.t.push(t0);
        out.y.push(y0.clone());
        if !record_all {
            targets.next();
        }
    }
    if t1 <= t0 {
        return out;
    }
    let mut t = t0;
    let mut y = y0;
    let mut k1 = match f(t, &y) {
        Ok(v) => v,
        Err(e) => {
            out.stopped = Some(e.to_string());
            return out;
        }
    };
    let span = t1 - t0;
    let mut h = opts.h_init.unwrap_or_else(|| {
        let scale = opts.atol + opts.rtol * y.amax();
        let d0 = y.amax() / scale;
        let d1 = k1.amax() / scale;
        let guess = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        guess.min(span)
    });
    h = h.min(opts.h_max);
    let mut k = vec![DVector::zeros(y.len()); 7];
    while t < t1 {
        if out.steps >= opts.max_steps {
            out.stopped = Some(format!("step limit {} reached", opts.max_steps));
            return out;
        }
        let next_target = if record_all { t1 } else { targets.peek().copied().unwrap_or(t1) };
        let h_free = h;
        let mut clamped = false;
        if t + h >= next_target {
            h = next_target - t;
            clamped = true;
        }
        k[0] = k1.clone();
        let mut failed = None;
        for s in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate().take(s) {
                if A[s][j] != 0.0 {
                    ys.axpy(h * A[s][j], kj, 1.0);
                }
            }
            match f(t + C[s] * h, &ys) {
                Ok(v) => k[s] = v,
                Err(e) => {
                    failed = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = failed {
            // retry with a smaller step before giving up
            if h > opts.h_min * 16.0 {
                h *= 0.25;
                continue;
            }
            out.stopped = Some(FinslerError::Integration { t, reason: e.to_string() }.to_string());
            return out;
        }
        let mut y_new = y.clone();
        for (j, kj) in k.iter().enumerate().take(6) {
            if A[6][j] != 0.0 {
                y_new.axpy(h * A[6][j], kj, 1.0);
            }
        }
        let mut err = 0.0;
        for i in 0..y.len() {
            let e: f64 = (0..7).map(|s| E[s] * k[s][i]).sum::<f64>() * h;
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / y.len() as f64).sqrt();
        if !err.is_finite() || !y_new.iter().all(|v| v.is_finite()) {
            if h > opts.h_min * 16.0 {
                h *= 0.25;
                continue;
            }
            out.stopped = Some(format!("non-finite state at t = {t}"));
            return out;
        }
        if err <= 1.0 {
            t = if clamped { next_target } else { t + h };
            y = y_new;
            k1 = k[6].clone();
            out.steps += 1;
            let hit = clamped && !record_all && targets.peek().is_some();
            if record_all || hit {
                out.t.push(t);
                out.y.push(y.clone());
                if hit {
                    targets.next();
                }
            }
            if let Some(reason) = monitor(t, &y) {
                if !record_all && !hit {
                    out.t.push(t);
                    out.y.push(y.clone());
                }
                out.stopped = Some(reason);
                return out;
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        let factor = if err > 1.0 { factor.min(1.0) } else { factor };
        if clamped && err <= 1.0 {
            h = h_free.min(opts.h_max);
            continue;
        }
        h = (h * factor).min(opts.h_max);
        if h < opts.h_min {
            out.stopped = Some(format!("step size underflow at t = {t}"));
            return out;
        }
    }
    out
}
