//! Implementations behind the CLI subcommands. Each returns its payload as
//! a value or rendered text; `main` handles output routing and exit codes.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use floqseirs_core::incidence::{check_assumptions, AssumptionReport};
use floqseirs_core::model::{rhs_reduced, State3};
use floqseirs_core::odeint::integrate_sampled;
use floqseirs_core::reproduction::NgmAssembly;
use floqseirs_core::{dfe, R0Report, SolverConfig, Trajectory};

use crate::config::{fmt_full, AppError, RunConfig};

/// Verdict of the long-horizon persistence experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Extinct,
    Persistent,
    Undetermined,
}

/// Empirical extinction/persistence evidence from one simulation run.
#[derive(Debug, Clone, Serialize)]
pub struct PersistenceVerdict {
    /// Number of trailing periods the minima are taken over.
    pub tail_window: usize,
    #[serde(rename = "tail_min_E")]
    pub tail_min_e: f64,
    #[serde(rename = "tail_min_I")]
    pub tail_min_i: f64,
    /// First sampled time with `E + I` below the extinction threshold.
    pub extinction_time: Option<f64>,
    pub verdict: Verdict,
}

pub struct PersistOptions {
    pub tail_periods: usize,
    pub floor: f64,
    pub extinction_threshold: f64,
}

impl Default for PersistOptions {
    fn default() -> Self {
        Self {
            tail_periods: 20,
            floor: 1e-3,
            extinction_threshold: 1.0,
        }
    }
}

pub struct SweepOptions {
    pub beta0_min: f64,
    pub beta0_max: f64,
    pub steps: usize,
    pub jobs: usize,
    pub tol: f64,
}

fn sample_times(horizon: f64, interval: f64) -> Vec<f64> {
    let n = (horizon / interval + 1e-9).floor() as usize;
    (1..=n.max(1)).map(|k| k as f64 * interval).collect()
}

fn run_reduced(config: &RunConfig) -> Result<Trajectory<3>, AppError> {
    let f = config.incidence()?;
    let params = &config.params;
    let cfg = config.solver();
    let y0 = [config.initial.s0, config.initial.e0, config.initial.i0];
    let times = sample_times(config.horizon, config.sample_interval);
    let rhs = |t: f64, y: &[f64; 3]| {
        rhs_reduced(params, &f, t, &State3::from_array(*y)).map(State3::to_array)
    };
    Ok(integrate_sampled(rhs, y0, 0.0, &times, &cfg)?)
}

/// `simulate`: reduced-system time series with R reconstructed, as CSV.
pub fn simulate(config: &RunConfig) -> Result<String, AppError> {
    let traj = run_reduced(config)?;
    log::info!(
        "simulated {} years in {} steps ({} rejected)",
        config.horizon,
        traj.stats.steps,
        traj.stats.rejected
    );
    let mut out = String::with_capacity(traj.len() * 100);
    out.push_str("t,S,E,I,R\n");
    for (t, s) in traj.iter() {
        let r = config.params.n - s[0] - s[1] - s[2];
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_full(t),
            fmt_full(s[0]),
            fmt_full(s[1]),
            fmt_full(s[2]),
            fmt_full(r)
        ));
    }
    Ok(out)
}

/// The solver used for evolution-operator work: the config's solver when one
/// is given explicitly, otherwise tight relative-only control (the state
/// scale of the linearized systems is unrelated to the population size).
fn operator_solver(config: &RunConfig) -> SolverConfig {
    config.solver.unwrap_or_else(SolverConfig::operator_default)
}

/// `r0`: both reproduction numbers plus solver evidence.
pub fn r0(config: &RunConfig, tol: f64) -> Result<R0Report, AppError> {
    let f = config.incidence()?;
    let cfg = operator_solver(config);
    let assembly = NgmAssembly::new(&config.params, &f, &cfg)?;
    let report = assembly.r0_solve(tol, &cfg)?;
    log::info!(
        "r0 = {:.8} (avg {:.8}) in {} iterations",
        report.r0,
        report.r0_avg,
        report.iterations
    );
    Ok(report)
}

/// `dfe`: one period of the disease-free solution as CSV.
pub fn dfe_csv(config: &RunConfig) -> Result<String, AppError> {
    let sol = dfe::s_hat_solution(&config.params, &operator_solver(config))?;
    let samples = sol.samples();
    let mut out = String::with_capacity(samples.len() * 45);
    out.push_str("t,S_hat\n");
    for (k, value) in samples.iter().enumerate() {
        let t = config.params.period_lt * k as f64 / dfe::STORED_SAMPLES as f64;
        out.push_str(&format!("{},{}\n", fmt_full(t), fmt_full(*value)));
    }
    Ok(out)
}

/// `sweep`: reproduction numbers across a transmission-offset ladder, rows
/// computed concurrently but emitted in ladder order. Returns the CSV and
/// the number of rows that succeeded.
pub fn sweep(config: &RunConfig, opts: &SweepOptions) -> Result<(String, usize), AppError> {
    if !(opts.beta0_min > 0.0 && opts.beta0_max > opts.beta0_min) {
        return Err(AppError::Config(format!(
            "sweep needs 0 < beta0-min < beta0-max, got [{}, {}]",
            opts.beta0_min, opts.beta0_max
        )));
    }
    if opts.steps < 2 {
        return Err(AppError::Config(format!(
            "sweep needs at least 2 steps, got {}",
            opts.steps
        )));
    }
    // Reject unsweepable coefficient forms before spawning workers.
    config
        .params
        .beta
        .with_offset(config.params.beta.offset())
        .map_err(|e| AppError::Config(e.to_string()))?;

    let offsets: Vec<f64> = (0..opts.steps)
        .map(|i| {
            opts.beta0_min + (opts.beta0_max - opts.beta0_min) * i as f64 / (opts.steps - 1) as f64
        })
        .collect();
    let rows: Mutex<Vec<Option<(String, bool)>>> = Mutex::new(vec![None; opts.steps]);
    let next = AtomicUsize::new(0);
    let jobs = opts.jobs.clamp(1, opts.steps);

    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= offsets.len() {
                    break;
                }
                let row = sweep_row(config, offsets[i], opts.tol);
                rows.lock().unwrap()[i] = Some(row);
            });
        }
    });

    let mut out = String::from("beta0,r0_avg,r0,classification\n");
    let mut ok = 0usize;
    for row in rows.into_inner().unwrap() {
        let (line, succeeded) = row.expect("worker filled every row");
        if succeeded {
            ok += 1;
        }
        out.push_str(&line);
        out.push('\n');
    }
    Ok((out, ok))
}

fn sweep_row(config: &RunConfig, beta0: f64, tol: f64) -> (String, bool) {
    let result = (|| -> Result<R0Report, AppError> {
        let mut params = config.params.clone();
        params.beta = params.beta.with_offset(beta0)?;
        let f = config.incidence()?;
        let cfg = operator_solver(config);
        Ok(NgmAssembly::new(&params, &f, &cfg)?.r0_solve(tol, &cfg)?)
    })();
    match result {
        Ok(report) => {
            let class = serde_json::to_value(report.classification)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_else(|| "unknown".into());
            (
                format!(
                    "{},{},{},{}",
                    fmt_full(beta0),
                    fmt_full(report.r0_avg),
                    fmt_full(report.r0),
                    class
                ),
                true,
            )
        }
        Err(err) => {
            log::warn!("sweep row beta0 = {beta0} failed: {err}");
            (format!("{},nan,nan,failed", fmt_full(beta0)), false)
        }
    }
}

/// `persist-check`: long-horizon empirical threshold verdict.
pub fn persist_check(
    config: &RunConfig,
    opts: &PersistOptions,
) -> Result<PersistenceVerdict, AppError> {
    let window = opts.tail_periods as f64 * config.params.period_lt;
    if config.horizon < 3.0 * window {
        return Err(AppError::Config(format!(
            "horizon {} must cover at least 3 tail windows ({} years)",
            config.horizon,
            3.0 * window
        )));
    }
    let traj = run_reduced(config)?;
    let tail_start = config.horizon - window;
    let mut tail_min_e = f64::INFINITY;
    let mut tail_min_i = f64::INFINITY;
    let mut extinction_time = None;
    for (t, s) in traj.iter() {
        if extinction_time.is_none() && s[1] + s[2] < opts.extinction_threshold {
            extinction_time = Some(t);
        }
        if t >= tail_start {
            tail_min_e = tail_min_e.min(s[1]);
            tail_min_i = tail_min_i.min(s[2]);
        }
    }
    let verdict = if extinction_time.is_some() {
        Verdict::Extinct
    } else if tail_min_e >= opts.floor && tail_min_i >= opts.floor {
        Verdict::Persistent
    } else {
        Verdict::Undetermined
    };
    Ok(PersistenceVerdict {
        tail_window: opts.tail_periods,
        tail_min_e,
        tail_min_i,
        extinction_time,
        verdict,
    })
}

/// `check-f`: assumption report for the configured incidence, on a grid
/// spanning the population scale.
pub fn check_f(config: &RunConfig) -> Result<AssumptionReport, AppError> {
    let f = config.incidence()?;
    Ok(check_assumptions(&f, config.params.n, 64)?)
}
