//! Embedded Dormand-Prince 5(4) integration, fixed and adaptive, and the
//! order-reduction experiment with a discontinuous second derivative.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Explicit Runge-Kutta pair with a 5th-order and an embedded 4th-order
/// solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ButcherTableau {
    pub c: [f64; 7],
    pub a: [[f64; 6]; 7],
    pub b: [f64; 7],
    pub b_hat: [f64; 7],
}

pub const DORMAND_PRINCE: ButcherTableau = ButcherTableau {
    c: [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0],
    a: [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
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
    ],
    b: [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ],
    b_hat: [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ],
};

/// Right-hand side `f(t, y, dy)`.
pub trait Rhs {
    fn eval(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
}

impl<F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>> Rhs for F {
    fn eval(&mut self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        self(t, y, dy)
    }
}

fn eval_checked<F: Rhs>(f: &mut F, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
    f.eval(t, y, dy)?;
    if dy.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteRhs { t })
    }
}

/// Stage storage for one Dormand-Prince step.
#[derive(Debug, Clone)]
pub struct Dp45 {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    pub y5: Vec<f64>,
    pub y4: Vec<f64>,
    /// Increments `y5 - y` and `y4 - y` before rounding into the state.
    pub d5: Vec<f64>,
    pub d4: Vec<f64>,
    /// `k[0]` already holds `f(t, y)` (first-same-as-last).
    fsal: bool,
}

impl Dp45 {
    pub fn new(dim: usize) -> Self {
        Dp45 {
            k: core::array::from_fn(|_| vec![0.0; dim]),
            tmp: vec![0.0; dim],
            y5: vec![0.0; dim],
            y4: vec![0.0; dim],
            d5: vec![0.0; dim],
            d4: vec![0.0; dim],
            fsal: false,
        }
    }

    /// Forget the cached first stage (after the state was changed outside).
    pub fn reset(&mut self) {
        self.fsal = false;
    }

    /// One step from `(t, y)`; fills `y5`, `y4`.
    pub fn step<F: Rhs>(&mut self, f: &mut F, t: f64, y: &[f64], dt: f64) -> Result<()> {
        let tab = &DORMAND_PRINCE;
        if !self.fsal {
            eval_checked(f, t, y, &mut self.k[0])?;
        }
        for s in 1..7 {
            for i in 0..y.len() {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += tab.a[s][j] * self.k[j][i];
                }
                self.tmp[i] = y[i] + dt * acc;
            }
            let (head, tail) = self.k.split_at_mut(s);
            let _ = head;
            eval_checked(f, t + tab.c[s] * dt, &self.tmp, &mut tail[0])?;
        }
        // Stage 7 is evaluated at y5 because a[6] == b.
        self.y5.copy_from_slice(&self.tmp);
        for i in 0..y.len() {
            let acc5: f64 = (0..6).map(|j| tab.b[j] * self.k[j][i]).sum();
            let acc4: f64 = (0..7).map(|j| tab.b_hat[j] * self.k[j][i]).sum();
            self.d5[i] = dt * acc5;
            self.d4[i] = dt * acc4;
            self.y4[i] = y[i] + self.d4[i];
        }
        self.fsal = false;
        Ok(())
    }

    /// Promote the last stage to the first stage of the next step.
    pub fn accept(&mut self) {
        self.k.swap(0, 6);
        self.fsal = true;
    }

    /// Mixed absolute/relative RMS norm of `y5 - y4`.
    pub fn error_norm(&self, y: &[f64], rtol: f64, atol: f64) -> f64 {
        error_norm(y, &self.y5, &self.y4, rtol, atol)
    }
}

pub fn error_norm(y: &[f64], y5: &[f64], y4: &[f64], rtol: f64, atol: f64) -> f64 {
    let n = y.len().max(1) as f64;
    let sum: f64 = (0..y.len())
        .map(|i| {
            let sc = atol + rtol * y[i].abs().max(y5[i].abs());
            let e = (y5[i] - y4[i]) / sc;
            e * e
        })
        .sum();
    (sum / n).sqrt()
}

/// Single step result `(y5, y4, err)` with the default norm tolerances
/// `rtol = atol = 1`.
pub fn dp45_step<F: Rhs>(
    f: &mut F,
    t: f64,
    y: &[f64],
    dt: f64,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let mut st = Dp45::new(y.len());
    st.step(f, t, y, dt)?;
    let err = st.error_norm(y, 1.0, 1.0);
    Ok((st.y5, st.y4, err))
}

/// Final states of a fixed-step run. `res5`/`res4` are the compensation
/// terms of the summation: the accurate result is `y - res`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedResult {
    pub y5: Vec<f64>,
    pub y4: Vec<f64>,
    pub res5: Vec<f64>,
    pub res4: Vec<f64>,
}

/// `n_steps` uniform steps on `[t0, t1]`. The 5th- and 4th-order
/// solutions are propagated as two independent chains.
pub fn integrate_fixed<F: Rhs>(
    f: &mut F,
    t0: f64,
    y0: &[f64],
    t1: f64,
    n_steps: usize,
) -> Result<FixedResult> {
    if n_steps == 0 {
        return Err(Error::InvalidSettings("n_steps must be at least 1"));
    }
    let dim = y0.len();
    let node = |i: usize| {
        if i == n_steps {
            t1
        } else {
            t0 + (t1 - t0) * i as f64 / n_steps as f64
        }
    };
    let mut chain = |fifth: bool| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut st = Dp45::new(dim);
        let mut y = y0.to_vec();
        let mut comp = vec![0.0; dim];
        for i in 0..n_steps {
            let (ta, tb) = (node(i), node(i + 1));
            st.step(f, ta, &y, tb - ta)?;
            let incr = if fifth { &st.d5 } else { &st.d4 };
            for j in 0..dim {
                // Kahan summation of the increments.
                let d = incr[j] - comp[j];
                let s = y[j] + d;
                comp[j] = (s - y[j]) - d;
                y[j] = s;
            }
            if fifth {
                st.accept();
            }
        }
        Ok((y, comp))
    };
    let (y5, res5) = chain(true)?;
    let (y4, res4) = chain(false)?;
    Ok(FixedResult { y5, y4, res5, res4 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveSettings {
    pub rtol: f64,
    pub atol: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Initial step; estimated when `None`.
    pub dt_init: Option<f64>,
    pub max_steps: usize,
    /// Keep every attempted step in the trajectory.
    pub record: bool,
}

impl Default for AdaptiveSettings {
    fn default() -> Self {
        AdaptiveSettings {
            rtol: 1e-8,
            atol: 1e-10,
            dt_min: 1e-14,
            dt_max: f64::INFINITY,
            dt_init: None,
            max_steps: 1_000_000,
            record: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub y: Vec<f64>,
    pub dt: f64,
    pub err: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: f64,
    pub y: Vec<f64>,
    pub steps: Vec<StepRecord>,
    pub n_accepted: usize,
    pub n_rejected: usize,
    /// Smallest step magnitude attempted.
    pub min_dt: f64,
    /// Step size proposed for a continuation.
    pub next_dt: f64,
}

fn initial_step<F: Rhs>(
    f: &mut F,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    dir: f64,
    s: &AdaptiveSettings,
) -> Result<f64> {
    let sc: Vec<f64> = y0.iter().map(|v| s.atol + s.rtol * v.abs()).collect();
    let rms = |v: &dyn Fn(usize) -> f64| {
        let n = y0.len().max(1) as f64;
        ((0..y0.len()).map(|i| (v(i) / sc[i]).powi(2)).sum::<f64>() / n).sqrt()
    };
    let d0 = rms(&|i| y0[i]);
    let d1 = rms(&|i| f0[i]);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1: Vec<f64> = (0..y0.len()).map(|i| y0[i] + dir * h0 * f0[i]).collect();
    let mut f1 = vec![0.0; y0.len()];
    eval_checked(f, t0 + dir * h0, &y1, &mut f1)?;
    let d2 = rms(&|i| f1[i] - f0[i]) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1))
}

/// Verdict of a per-step hook.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepControl {
    Continue,
    /// The hook changed the state; the cached stage is discarded.
    Modified,
    Stop,
}

/// Adaptive integration from `t0` to `t1` (either direction) with the
/// standard accept/reject controller.
pub fn integrate_adaptive<F: Rhs>(
    f: &mut F,
    t0: f64,
    y0: &[f64],
    t1: f64,
    s: &AdaptiveSettings,
) -> Result<Trajectory> {
    integrate_adaptive_with(f, t0, y0, t1, s, |_, _| StepControl::Continue)
}

/// [`integrate_adaptive`] with a hook called after every accepted step.
pub fn integrate_adaptive_with<F: Rhs, H: FnMut(f64, &mut [f64]) -> StepControl>(
    f: &mut F,
    t0: f64,
    y0: &[f64],
    t1: f64,
    s: &AdaptiveSettings,
    mut hook: H,
) -> Result<Trajectory> {
    if !(s.rtol > 0.0 && s.atol > 0.0) {
        return Err(Error::InvalidSettings("rtol and atol must be positive"));
    }
    if !(s.dt_min > 0.0 && s.dt_min <= s.dt_max) {
        return Err(Error::InvalidSettings("need 0 < dt_min <= dt_max"));
    }
    let mut traj = Trajectory {
        t: t0,
        y: y0.to_vec(),
        steps: Vec::new(),
        n_accepted: 0,
        n_rejected: 0,
        min_dt: f64::INFINITY,
        next_dt: s.dt_init.unwrap_or(0.0),
    };
    if t1 == t0 {
        return Ok(traj);
    }
    let dir = if t1 > t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut st = Dp45::new(y0.len());
    let mut dt = match s.dt_init {
        Some(h) => h.abs(),
        None => {
            let mut f0 = vec![0.0; y0.len()];
            eval_checked(f, t0, y0, &mut f0)?;
            initial_step(f, t0, y0, &f0, dir, s)?
        }
    };
    dt = dt.clamp(s.dt_min, s.dt_max).min(span);
    let mut attempts = 0usize;
    loop {
        let remaining = (t1 - traj.t) * dir;
        if remaining <= 0.0 {
            break;
        }
        attempts += 1;
        if attempts > s.max_steps {
            return Err(Error::TooManySteps(s.max_steps));
        }
        let last = dt >= remaining;
        let h = if last { remaining } else { dt };
        traj.min_dt = traj.min_dt.min(h);
        st.step(f, traj.t, &traj.y, dir * h)?;
        let err = st.error_norm(&traj.y, s.rtol, s.atol);
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        let accepted = err <= 1.0;
        if accepted {
            traj.t = if last { t1 } else { traj.t + dir * h };
            traj.y.copy_from_slice(&st.y5);
            st.accept();
            traj.n_accepted += 1;
            // A clamped final step does not shrink the proposal.
            let base = if last { dt.max(h) } else { h };
            dt = (base * factor).clamp(s.dt_min, s.dt_max);
            traj.next_dt = dt;
            let verdict = hook(traj.t, &mut traj.y);
            if s.record {
                traj.steps.push(StepRecord {
                    t: traj.t,
                    y: traj.y.clone(),
                    dt: h,
                    err,
                    accepted,
                });
            }
            match verdict {
                StepControl::Continue => {}
                StepControl::Modified => st.reset(),
                StepControl::Stop => break,
            }
        } else {
            if s.record {
                traj.steps.push(StepRecord {
                    t: traj.t,
                    y: traj.y.clone(),
                    dt: h,
                    err,
                    accepted,
                });
            }
            traj.n_rejected += 1;
            if h <= s.dt_min {
                return Err(Error::MinStepReached { t: traj.t, dt: h });
            }
            dt = (h * factor).max(s.dt_min);
        }
    }
    Ok(traj)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Smooth part of the experiment's right-hand side. Its integral over
/// `[0, 1]` is zero, so the exact solution stays small and the errors of
/// the 5th-order solution remain measurable at `n = 512`.
pub fn order_reduction_f1(t: f64) -> f64 {
    let x = t - 0.5;
    2.0 * (6.0 * x).sinh() + 1600.0 * x.powi(4) - 20.0
}

/// `f1` for `t <= 1/2`, `f1 - (ε/2)(t - 1/2)^2` beyond: value and slope
/// match at `1/2` and `f1'' - f2''` jumps by `ε`.
pub fn order_reduction_rhs(eps: f64, t: f64) -> f64 {
    let x = t - 0.5;
    if t > 0.5 {
        order_reduction_f1(t) - 0.5 * eps * x * x
    } else {
        order_reduction_f1(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderRow {
    pub n: usize,
    pub err5: f64,
    pub err4: f64,
}

/// Fixed-step errors at `t = 1` for `y' = f(t)`, `y(0) = 0`.
pub fn order_reduction_experiment(eps: f64, n_list: &[usize]) -> Vec<OrderRow> {
    let exact = -eps / 48.0;
    n_list
        .iter()
        .map(|&n| {
            let mut f = |t: f64, _: &[f64], dy: &mut [f64]| -> Result<()> {
                dy[0] = order_reduction_rhs(eps, t);
                Ok(())
            };
            let r = integrate_fixed(&mut f, 0.0, &[0.0], 1.0, n).expect("finite right-hand side");
            OrderRow {
                n,
                err5: ((r.y5[0] - exact) - r.res5[0]).abs(),
                err4: ((r.y4[0] - exact) - r.res4[0]).abs(),
            }
        })
        .collect()
}

/// Fitted `(slope5, slope4)` of a table against `Δt = 1/n`.
pub fn order_slopes(rows: &[OrderRow]) -> (f64, f64) {
    let dt: Vec<f64> = rows.iter().map(|r| 1.0 / r.n as f64).collect();
    let e5: Vec<f64> = rows.iter().map(|r| r.err5).collect();
    let e4: Vec<f64> = rows.iter().map(|r| r.err4).collect();
    (loglog_slope(&dt, &e5), loglog_slope(&dt, &e4))
}
