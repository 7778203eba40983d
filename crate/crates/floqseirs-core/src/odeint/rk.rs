//! Explicit Runge-Kutta steppers: classic fixed-step RK4 and adaptive
//! Dormand-Prince 5(4) with step-size control.

use super::{Method, SolverConfig, SolverStats, Trajectory};
use crate::error::{Error, Result};

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
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
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// Difference between the 5th- and embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MAX_GROWTH: f64 = 5.0;
const MIN_SHRINK: f64 = 0.1;
const SAFETY: f64 = 0.9;

struct Driver<'c, const N: usize, F> {
    rhs: F,
    cfg: &'c SolverConfig,
    stats: SolverStats,
    /// Current adaptive step proposal, persisted across sample boundaries.
    h: f64,
    /// Time scale used for the step-underflow guard.
    span: f64,
}

impl<'c, const N: usize, F> Driver<'c, N, F>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    fn new(rhs: F, cfg: &'c SolverConfig, span: f64) -> Self {
        let h = match cfg.method {
            Method::FixedRk4 { step } => step,
            Method::AdaptiveRk45 { .. } => (span * 1e-3).max(1e-12 * span),
        };
        Self {
            rhs,
            cfg,
            stats: SolverStats::default(),
            h,
            span,
        }
    }

    fn eval(&mut self, t: f64, y: &[f64; N]) -> Result<[f64; N]> {
        self.stats.rhs_evals += 1;
        (self.rhs)(t, y)
    }

    fn count_step(&mut self) -> Result<()> {
        self.stats.steps += 1;
        if self.stats.steps + self.stats.rejected > self.cfg.max_steps {
            return Err(Error::Numerical(format!(
                "step budget of {} exhausted",
                self.cfg.max_steps
            )));
        }
        Ok(())
    }

    /// Advances `(t, y)` exactly to `target`.
    fn step_to(&mut self, t: &mut f64, y: &mut [f64; N], target: f64) -> Result<()> {
        match self.cfg.method {
            Method::FixedRk4 { step } => self.rk4_segment(t, y, target, step),
            Method::AdaptiveRk45 { abs_tol, rel_tol } => self
                .rk45_segment(t, y, target, abs_tol, rel_tol, false)
                .map(|_| ()),
        }
    }

    /// Like `step_to`, but records every accepted step into `out`.
    fn step_to_recording(
        &mut self,
        t: &mut f64,
        y: &mut [f64; N],
        target: f64,
        out: &mut Vec<(f64, [f64; N])>,
    ) -> Result<()> {
        match self.cfg.method {
            Method::FixedRk4 { step } => {
                let t0 = *t;
                let len = target - t0;
                let n = ((len / step).ceil() as usize).max(1);
                let h = len / n as f64;
                for k in 0..n {
                    self.count_step()?;
                    self.rk4_step(*t, y, h)?;
                    *t = if k + 1 == n {
                        target
                    } else {
                        t0 + (k + 1) as f64 * h
                    };
                    out.push((*t, *y));
                }
                Ok(())
            }
            Method::AdaptiveRk45 { abs_tol, rel_tol } => self
                .rk45_segment(t, y, target, abs_tol, rel_tol, true)
                .map(|steps| out.extend(steps)),
        }
    }

    fn rk4_segment(&mut self, t: &mut f64, y: &mut [f64; N], target: f64, step: f64) -> Result<()> {
        let t0 = *t;
        let len = target - t0;
        if len <= 0.0 {
            return Ok(());
        }
        let n = ((len / step).ceil() as usize).max(1);
        let h = len / n as f64;
        for k in 0..n {
            self.count_step()?;
            self.rk4_step(*t, y, h)?;
            *t = if k + 1 == n {
                target
            } else {
                t0 + (k + 1) as f64 * h
            };
        }
        Ok(())
    }

    fn rk4_step(&mut self, t: f64, y: &mut [f64; N], h: f64) -> Result<()> {
        let k1 = self.eval(t, y)?;
        let k2 = self.eval(t + 0.5 * h, &axpy(y, 0.5 * h, &k1))?;
        let k3 = self.eval(t + 0.5 * h, &axpy(y, 0.5 * h, &k2))?;
        let k4 = self.eval(t + h, &axpy(y, h, &k3))?;
        for i in 0..N {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !finite(y) {
            return Err(Error::Numerical(format!("non-finite state at t = {t}")));
        }
        Ok(())
    }

    fn rk45_segment(
        &mut self,
        t: &mut f64,
        y: &mut [f64; N],
        target: f64,
        abs_tol: f64,
        rel_tol: f64,
        record: bool,
    ) -> Result<Vec<(f64, [f64; N])>> {
        let mut recorded = Vec::new();
        let mut last_cause: Option<String> = None;
        let h_floor = 1e-14 * self.span.max(target.abs());
        while *t < target {
            let h = self.h.min(target - *t).max(0.0);
            if h < h_floor {
                let detail = last_cause
                    .map(|c| format!(" (last trial failure: {c})"))
                    .unwrap_or_default();
                return Err(Error::Numerical(format!(
                    "step size underflow at t = {t} (h = {h:.3e}){detail}"
                )));
            }
            match self.dp_step(*t, y, h, abs_tol, rel_tol)? {
                StepOutcome::Accept { y_new, h_next } => {
                    self.count_step()?;
                    *y = y_new;
                    // Land exactly on the target when the step was clamped.
                    *t = if h == target - *t { target } else { *t + h };
                    self.h = h_next;
                    if record {
                        recorded.push((*t, *y));
                    }
                }
                StepOutcome::Reject { h_next, cause } => {
                    self.stats.rejected += 1;
                    if self.stats.steps + self.stats.rejected > self.cfg.max_steps {
                        return Err(Error::Numerical(format!(
                            "step budget of {} exhausted",
                            self.cfg.max_steps
                        )));
                    }
                    if cause.is_some() {
                        last_cause = cause;
                    }
                    self.h = h_next;
                }
            }
        }
        Ok(recorded)
    }

    fn dp_step(
        &mut self,
        t: f64,
        y: &[f64; N],
        h: f64,
        abs_tol: f64,
        rel_tol: f64,
    ) -> Result<StepOutcome<N>> {
        let reject = |h: f64, cause: Option<String>| {
            Ok(StepOutcome::Reject {
                h_next: 0.5 * h,
                cause,
            })
        };
        let mut k = [[0.0; N]; 7];
        // A failure at the accepted state is a genuine domain violation;
        // failures at trial stages below only mean the step is too long.
        k[0] = self.eval(t, y)?;
        let mut trial_failure = if finite(&k[0]) {
            None
        } else {
            Some("non-finite derivative".to_string())
        };
        if trial_failure.is_none() {
            for s in 1..7 {
                let mut ys = *y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        for i in 0..N {
                            ys[i] += h * a * kj[i];
                        }
                    }
                }
                if !finite(&ys) {
                    trial_failure = Some("non-finite trial state".into());
                    break;
                }
                match self.eval(t + C[s] * h, &ys) {
                    Ok(v) if finite(&v) => k[s] = v,
                    Ok(_) => {
                        trial_failure = Some("non-finite derivative".into());
                        break;
                    }
                    Err(Error::Domain(msg)) => {
                        trial_failure = Some(msg);
                        break;
                    }
                    Err(other) => return Err(other),
                }
            }
        }
        if let Some(cause) = trial_failure {
            return reject(h, Some(cause));
        }

        let mut y_new = *y;
        for (s, ks) in k.iter().enumerate() {
            if B[s] != 0.0 {
                for i in 0..N {
                    y_new[i] += h * B[s] * ks[i];
                }
            }
        }
        if !finite(&y_new) {
            return reject(h, Some("non-finite step result".into()));
        }

        let mut err_sq = 0.0;
        let mut terms = 0usize;
        for i in 0..N {
            let mut e = 0.0;
            for (s, ks) in k.iter().enumerate() {
                e += E[s] * ks[i];
            }
            e *= h;
            let scale = abs_tol + rel_tol * y[i].abs().max(y_new[i].abs());
            if scale == 0.0 {
                if e == 0.0 {
                    continue; // structurally zero component
                }
                return reject(h, Some("zero error scale".into()));
            }
            err_sq += (e / scale) * (e / scale);
            terms += 1;
        }
        let err = if terms == 0 {
            0.0
        } else {
            (err_sq / terms as f64).sqrt()
        };

        if !err.is_finite() {
            return reject(h, Some("non-finite error estimate".into()));
        }
        if err <= 1.0 {
            let factor = if err == 0.0 {
                MAX_GROWTH
            } else {
                (SAFETY * err.powf(-0.2)).clamp(MIN_SHRINK, MAX_GROWTH)
            };
            Ok(StepOutcome::Accept {
                y_new,
                h_next: h * factor,
            })
        } else {
            let factor = (SAFETY * err.powf(-0.2)).clamp(MIN_SHRINK, 1.0);
            Ok(StepOutcome::Reject {
                h_next: h * factor,
                cause: None,
            })
        }
    }
}

enum StepOutcome<const N: usize> {
    Accept { y_new: [f64; N], h_next: f64 },
    Reject { h_next: f64, cause: Option<String> },
}

fn axpy<const N: usize>(y: &[f64; N], a: f64, x: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += a * x[i];
    }
    out
}

fn finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

fn check_inputs<const N: usize>(y0: &[f64; N], t0: f64, t1: f64) -> Result<()> {
    if !finite(y0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::Domain("non-finite integration input".into()));
    }
    if t1 <= t0 {
        return Err(Error::Domain(format!(
            "integration interval must satisfy t1 > t0 (got [{t0}, {t1}])"
        )));
    }
    Ok(())
}

/// Integrates `rhs` over `[t0, t1]`, recording every accepted step.
pub fn integrate<const N: usize, F>(
    rhs: F,
    y0: [f64; N],
    t0: f64,
    t1: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    check_inputs(&y0, t0, t1)?;
    let mut driver = Driver::new(rhs, cfg, t1 - t0);
    let mut t = t0;
    let mut y = y0;
    let mut out = vec![(t0, y0)];
    driver.step_to_recording(&mut t, &mut y, t1, &mut out)?;
    Ok(collect(out, driver.stats))
}

/// Integrates `rhs` from `t0`, landing exactly on each time in `samples`
/// (strictly increasing, all > t0) and recording the state there. The row at
/// `t0` is included.
pub fn integrate_sampled<const N: usize, F>(
    rhs: F,
    y0: [f64; N],
    t0: f64,
    samples: &[f64],
    cfg: &SolverConfig,
) -> Result<Trajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let t1 = *samples.last().ok_or_else(|| {
        Error::Domain("integrate_sampled requires at least one sample time".into())
    })?;
    check_inputs(&y0, t0, t1)?;
    if samples.windows(2).any(|w| w[1] <= w[0]) || samples[0] <= t0 {
        return Err(Error::Domain(
            "sample times must be strictly increasing and greater than t0".into(),
        ));
    }
    let mut driver = Driver::new(rhs, cfg, t1 - t0);
    let mut t = t0;
    let mut y = y0;
    let mut out = Vec::with_capacity(samples.len() + 1);
    out.push((t0, y0));
    for &s in samples {
        driver.step_to(&mut t, &mut y, s)?;
        out.push((t, y));
    }
    Ok(collect(out, driver.stats))
}

/// Integrates `rhs` over `[t0, t1]` and returns only the final state.
pub fn final_state<const N: usize, F>(
    rhs: F,
    y0: [f64; N],
    t0: f64,
    t1: f64,
    cfg: &SolverConfig,
) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    check_inputs(&y0, t0, t1)?;
    let mut driver = Driver::new(rhs, cfg, t1 - t0);
    let mut t = t0;
    let mut y = y0;
    driver.step_to(&mut t, &mut y, t1)?;
    Ok(y)
}

fn collect<const N: usize>(rows: Vec<(f64, [f64; N])>, stats: SolverStats) -> Trajectory<N> {
    let mut times = Vec::with_capacity(rows.len());
    let mut states = Vec::with_capacity(rows.len());
    for (t, y) in rows {
        times.push(t);
        states.push(y);
    }
    Trajectory {
        times,
        states,
        stats,
    }
}
