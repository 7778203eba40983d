//! The disease-free periodic solution: the unique positive LT-periodic
//! solution of `dS/dt = c - p(t) S`, its perturbed variant, and the generic
//! periodic fixed point of scalar linear periodic equations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::incidence::IncidenceFunction;
use crate::model::ModelParams;
use crate::odeint::{final_state, integrate_sampled, SolverConfig};

/// Number of uniform intervals stored per period. Downstream coefficient
/// assembly evaluates the solution inside adaptive integrators at arbitrary
/// times, so the density matters more than memory.
pub const STORED_SAMPLES: usize = 1024;

/// How a periodic solution was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructionMethod {
    /// Closed-form initial value from the periodicity quotient, then one
    /// period of ODE propagation.
    QuadratureFormula,
    /// Fixed point located by iterating the period map.
    PoincareFixedPoint,
}

/// A sampled LT-periodic scalar solution with cubic interpolation.
#[derive(Debug, Clone)]
pub struct PeriodicSolution {
    /// Values at `k * period / STORED_SAMPLES` for `k = 0..=STORED_SAMPLES`;
    /// the last entry is the raw propagated endpoint, so the periodicity
    /// defect stays observable.
    samples: Vec<f64>,
    period: f64,
    method: ConstructionMethod,
}

impl PeriodicSolution {
    /// Evaluates the solution at any time, reduced modulo the period, by
    /// Catmull-Rom interpolation on the stored samples with periodic wrap.
    pub fn value(&self, t: f64) -> f64 {
        let n = STORED_SAMPLES;
        let u = t.rem_euclid(self.period) / self.period * n as f64;
        let k = (u.floor() as usize).min(n - 1);
        let x = u - k as f64;
        let at = |idx: isize| self.samples[idx.rem_euclid(n as isize) as usize];
        let p0 = at(k as isize - 1);
        let p1 = at(k as isize);
        let p2 = at(k as isize + 1);
        let p3 = at(k as isize + 2);
        0.5 * (2.0 * p1
            + (p2 - p0) * x
            + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * x * x
            + (3.0 * p1 - 3.0 * p2 + p3 - p0) * x * x * x)
    }

    pub fn initial_value(&self) -> f64 {
        self.samples[0]
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn method(&self) -> ConstructionMethod {
        self.method
    }

    /// Relative gap between the propagated endpoint and the initial value.
    pub fn periodicity_defect(&self) -> f64 {
        let s0 = self.samples[0];
        (self.samples[STORED_SAMPLES] - s0).abs() / s0.abs().max(1e-300)
    }

    /// Minimum over the stored samples.
    pub fn min_value(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Maximum over the stored samples.
    pub fn max_value(&self) -> f64 {
        self.samples
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Time average over one period (periodic trapezoid rule).
    pub fn mean(&self) -> f64 {
        self.samples[..STORED_SAMPLES].iter().sum::<f64>() / STORED_SAMPLES as f64
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    fn from_scalar_ode(
        s0: f64,
        c: f64,
        p_fn: impl Fn(f64) -> f64,
        period: f64,
        method: ConstructionMethod,
        cfg: &SolverConfig,
    ) -> Result<Self> {
        let times: Vec<f64> = (1..=STORED_SAMPLES)
            .map(|k| period * k as f64 / STORED_SAMPLES as f64)
            .collect();
        let rhs = |t: f64, y: &[f64; 1]| Ok([c - p_fn(t) * y[0]]);
        let traj = integrate_sampled(rhs, [s0], 0.0, &times, cfg)?;
        Ok(Self {
            samples: traj.states.iter().map(|s| s[0]).collect(),
            period,
            method,
        })
    }
}

/// Tight tolerances for the auxiliary quadrature integrals, whose state is
/// O(1) regardless of the population scale.
fn quad_cfg() -> SolverConfig {
    SolverConfig::adaptive(1e-14, 1e-12)
}

/// Computes the two period integrals behind the periodicity quotient by
/// carrying the exponent as an auxiliary ODE state (avoiding nested
/// adaptive quadrature): returns `(int_0^LT p, int_0^LT exp(int_0^s p) ds)`.
fn period_integrals(p_fn: impl Fn(f64) -> f64, period: f64) -> Result<(f64, f64)> {
    let rhs = |t: f64, y: &[f64; 2]| Ok([p_fn(t), y[0].exp()]);
    let out = final_state(rhs, [0.0, 0.0], 0.0, period, &quad_cfg())?;
    Ok((out[0], out[1]))
}

/// Initial value of the unique periodic solution of `dS/dt = c - p(t) S`.
fn fixed_point_initial(c: f64, p_fn: impl Fn(f64) -> f64, period: f64) -> Result<f64> {
    let (p_total, weighted) = period_integrals(p_fn, period)?;
    let denom = p_total.exp() - 1.0;
    if denom <= 0.0 {
        return Err(Error::Numerical(format!(
            "periodicity quotient denominator {denom} is not positive (rate integral {p_total})"
        )));
    }
    Ok(c * weighted / denom)
}

/// The decay rate of the disease-free scalar equation: `mu + r(t) + delta`.
fn dfe_rate(params: &ModelParams) -> impl Fn(f64) -> f64 + '_ {
    move |t| params.mu + params.r.value(t) + params.delta
}

/// Constant susceptible inflow of the disease-free equation.
fn dfe_forcing(params: &ModelParams) -> f64 {
    params.n * (params.mu * (1.0 - params.p) + params.delta)
}

/// Initial value of the disease-free periodic solution, from the closed-form
/// periodicity quotient with both integrals evaluated numerically.
pub fn s_hat_initial(params: &ModelParams) -> Result<f64> {
    fixed_point_initial(dfe_forcing(params), dfe_rate(params), params.period_lt)
}

/// Builds the disease-free periodic solution: closed-form initial value,
/// then one period of ODE propagation sampled densely.
pub fn s_hat_solution(params: &ModelParams, cfg: &SolverConfig) -> Result<PeriodicSolution> {
    let s0 = s_hat_initial(params)?;
    PeriodicSolution::from_scalar_ode(
        s0,
        dfe_forcing(params),
        dfe_rate(params),
        params.period_lt,
        ConstructionMethod::QuadratureFormula,
        cfg,
    )
}

/// The disease-free solution at a single time (builds the sampled solution
/// internally; construct it once via [`s_hat_solution`] for repeated use).
pub fn s_hat(params: &ModelParams, t: f64) -> Result<f64> {
    Ok(s_hat_solution(params, &SolverConfig::operator_default())?.value(t))
}

fn perturbed_parts<'a>(
    params: &'a ModelParams,
    f: &IncidenceFunction,
    alpha: f64,
) -> Result<(f64, impl Fn(f64) -> f64 + 'a)> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::Domain(format!(
            "perturbation size must be non-negative, got {alpha}"
        )));
    }
    let c = dfe_forcing(params) - 2.0 * params.delta * alpha;
    if c <= 0.0 {
        return Err(Error::Domain(format!(
            "perturbed forcing term {c} is not positive"
        )));
    }
    let fp0 = f.prime_at_zero();
    let rate = move |t: f64| {
        params.beta.value(t) * fp0 * alpha + params.mu + params.r.value(t) + params.delta
    };
    Ok((c, rate))
}

/// The perturbed disease-free solution: the periodic solution of
/// `dS/dt = N(mu(1-p)+delta) - 2 delta alpha - (beta(t) f'(0) alpha + mu + r(t) + delta) S`.
pub fn s_hat_perturbed_solution(
    params: &ModelParams,
    f: &IncidenceFunction,
    alpha: f64,
    cfg: &SolverConfig,
) -> Result<PeriodicSolution> {
    let (c, rate) = perturbed_parts(params, f, alpha)?;
    let (solution, _) = periodic_fixed_point(c, rate, params.period_lt, cfg)?;
    Ok(solution)
}

/// Evaluates the perturbed disease-free solution at one time.
pub fn s_hat_perturbed(
    params: &ModelParams,
    f: &IncidenceFunction,
    alpha: f64,
    t: f64,
) -> Result<f64> {
    Ok(s_hat_perturbed_solution(params, f, alpha, &SolverConfig::operator_default())?.value(t))
}

/// The unique periodic solution of `dS/dt = c - p_fn(t) S` for constant
/// forcing `c > 0` and positive periodic rate, together with the one-period
/// contraction factor `exp(-int_0^LT p)` of its solution map.
pub fn periodic_fixed_point(
    c: f64,
    p_fn: impl Fn(f64) -> f64,
    period: f64,
    cfg: &SolverConfig,
) -> Result<(PeriodicSolution, f64)> {
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::Domain(format!(
            "forcing term must be positive, got {c}"
        )));
    }
    if !period.is_finite() || period <= 0.0 {
        return Err(Error::Domain(format!(
            "period must be positive, got {period}"
        )));
    }
    let (p_total, weighted) = period_integrals(&p_fn, period)?;
    let denom = p_total.exp() - 1.0;
    if denom <= 0.0 {
        return Err(Error::Numerical(format!(
            "rate integral {p_total} does not contract over one period"
        )));
    }
    let s0 = c * weighted / denom;
    let solution = PeriodicSolution::from_scalar_ode(
        s0,
        c,
        &p_fn,
        period,
        ConstructionMethod::QuadratureFormula,
        cfg,
    )?;
    Ok((solution, (-p_total).exp()))
}

/// Locates the same fixed point by iterating the one-period solution map
/// from `s_guess` until successive iterates agree to relative `tol`.
pub fn periodic_fixed_point_by_iteration(
    c: f64,
    p_fn: impl Fn(f64) -> f64,
    period: f64,
    s_guess: f64,
    tol: f64,
    cfg: &SolverConfig,
) -> Result<PeriodicSolution> {
    let rhs = |t: f64, y: &[f64; 1]| Ok([c - p_fn(t) * y[0]]);
    let mut s = s_guess;
    for _ in 0..1024 {
        let next = final_state(rhs, [s], 0.0, period, cfg)?[0];
        let done = (next - s).abs() <= tol * s.abs().max(1.0);
        s = next;
        if done {
            return PeriodicSolution::from_scalar_ode(
                s,
                c,
                &p_fn,
                period,
                ConstructionMethod::PoincareFixedPoint,
                cfg,
            );
        }
    }
    Err(Error::Numerical(
        "period-map iteration did not converge in 1024 rounds".into(),
    ))
}

/// The margin used when shifting the disease-free solution downward in the
/// persistence construction: half the minimum over a 256-point grid, which
/// always leaves `S_hat(t) - eta` positive.
pub fn eta_selection(s_hat: &PeriodicSolution) -> f64 {
    let min = (0..256)
        .map(|j| s_hat.value(s_hat.period() * j as f64 / 256.0))
        .fold(f64::INFINITY, f64::min);
    0.5 * min
}

/// Largest relative residual of `dS/dt = c - p(t) S` over `points` stored
/// nodes, with the time derivative taken by five-point central differences
/// on the stored samples (independent of the propagation route).
pub fn max_relative_ode_residual(
    sol: &PeriodicSolution,
    c: f64,
    p_fn: impl Fn(f64) -> f64,
    points: usize,
) -> f64 {
    let n = STORED_SAMPLES;
    let h = sol.period() / n as f64;
    let at = |idx: isize| sol.samples()[idx.rem_euclid(n as isize) as usize];
    let mut worst = 0.0f64;
    for j in 0..points {
        let k = (j * n / points) as isize;
        let deriv = (at(k - 2) - 8.0 * at(k - 1) + 8.0 * at(k + 1) - at(k + 2)) / (12.0 * h);
        let t = h * k as f64;
        let s = at(k);
        let rhs = c - p_fn(t) * s;
        let scale = c.abs().max((p_fn(t) * s).abs()).max(1e-300);
        worst = worst.max((deriv - rhs).abs() / scale);
    }
    worst
}
