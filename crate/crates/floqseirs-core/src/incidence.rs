//! Incidence-function abstraction and the numerical checker for the
//! structural assumptions the threshold analysis relies on:
//!
//! A1 continuous differentiability, A2 positivity (f(0)=0, f'(0)>0, f>0),
//! A3 f(I) - I f'(I) >= 0, A4 f''(0) <= 0, and A5 the existence of a
//! neighborhood of 0 where f dominates its second-order Taylor bound.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

type Callable = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An incidence function `f` entering the transmission term `beta(t) S f(I)`.
#[derive(Clone)]
pub enum IncidenceFunction {
    /// `f(I) = I` (mass action).
    Bilinear,
    /// `f(I) = I / (1 + a I)`, `a >= 0`.
    Saturated { a: f64 },
    /// `f(I) = I / (1 + k I^q)`, `k >= 0`, `q > 0`. Non-monotone for `q > 1`.
    PowerSaturated { k: f64, q: f64 },
    /// Externally supplied value/derivative pair.
    External {
        value: Callable,
        derivative: Callable,
    },
}

impl fmt::Debug for IncidenceFunction {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Bilinear => write!(out, "Bilinear"),
            Self::Saturated { a } => write!(out, "Saturated {{ a: {a} }}"),
            Self::PowerSaturated { k, q } => write!(out, "PowerSaturated {{ k: {k}, q: {q} }}"),
            Self::External { .. } => write!(out, "External {{ .. }}"),
        }
    }
}

impl IncidenceFunction {
    pub fn bilinear() -> Self {
        Self::Bilinear
    }

    pub fn saturated(a: f64) -> Result<Self> {
        if !a.is_finite() || a < 0.0 {
            return Err(Error::Domain(format!(
                "saturation constant must satisfy a >= 0, got {a}"
            )));
        }
        Ok(Self::Saturated { a })
    }

    pub fn power_saturated(k: f64, q: f64) -> Result<Self> {
        if !k.is_finite() || k < 0.0 {
            return Err(Error::Domain(format!("k must satisfy k >= 0, got {k}")));
        }
        if !q.is_finite() || q <= 0.0 {
            return Err(Error::Domain(format!("q must satisfy q > 0, got {q}")));
        }
        Ok(Self::PowerSaturated { k, q })
    }

    pub fn external(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::External {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
        }
    }

    /// `f(I)` for `I >= 0`.
    pub fn eval(&self, i: f64) -> Result<f64> {
        if i.is_nan() || i < 0.0 {
            return Err(Error::Domain(format!(
                "incidence argument must be non-negative, got {i}"
            )));
        }
        Ok(self.raw_value(i))
    }

    /// `f'(I)` for `I >= 0`.
    pub fn derivative(&self, i: f64) -> Result<f64> {
        if i.is_nan() || i < 0.0 {
            return Err(Error::Domain(format!(
                "incidence argument must be non-negative, got {i}"
            )));
        }
        Ok(self.raw_derivative(i))
    }

    /// Evaluation used inside right-hand sides: the linear extension
    /// `f'(0) * I` below zero keeps trial stages finite when an integrator
    /// probes marginally negative infection levels near extinction.
    pub fn eval_extended(&self, i: f64) -> f64 {
        if i >= 0.0 {
            self.raw_value(i)
        } else {
            self.prime_at_zero() * i
        }
    }

    fn raw_value(&self, i: f64) -> f64 {
        match self {
            Self::Bilinear => i,
            Self::Saturated { a } => i / (1.0 + a * i),
            Self::PowerSaturated { k, q } => i / (1.0 + k * i.powf(*q)),
            Self::External { value, .. } => value(i),
        }
    }

    fn raw_derivative(&self, i: f64) -> f64 {
        match self {
            Self::Bilinear => 1.0,
            Self::Saturated { a } => {
                let d = 1.0 + a * i;
                1.0 / (d * d)
            }
            Self::PowerSaturated { k, q } => {
                let p = i.powf(*q);
                let d = 1.0 + k * p;
                (1.0 + k * (1.0 - q) * p) / (d * d)
            }
            Self::External { derivative, .. } => derivative(i),
        }
    }

    /// `f'(0)`, analytic for built-in kinds.
    pub fn prime_at_zero(&self) -> f64 {
        match self {
            Self::Bilinear | Self::Saturated { .. } | Self::PowerSaturated { .. } => 1.0,
            Self::External { derivative, .. } => derivative(0.0),
        }
    }

    /// `f''(0)`: analytic for built-in kinds, one-sided finite differences
    /// on the derivative with step `1e-4 * grid_max` for external ones.
    ///
    /// For the power-saturated family, `f''(0)` is 0 for `q > 1`, `-2k` for
    /// `q = 1`, and unbounded below for `q < 1`.
    pub fn second_at_zero(&self, grid_max: f64) -> f64 {
        match self {
            Self::Bilinear => 0.0,
            Self::Saturated { a } => -2.0 * a,
            Self::PowerSaturated { k, q } => {
                if *q > 1.0 {
                    0.0
                } else if *q == 1.0 {
                    -2.0 * k
                } else if *k == 0.0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            Self::External { .. } => self.second_at_zero_fd(grid_max),
        }
    }

    /// Finite-difference estimate of `f''(0)` from the derivative, using a
    /// third-order one-sided stencil on `[0, 3h]` (the domain ends at 0, so
    /// a two-sided stencil is not available).
    pub fn second_at_zero_fd(&self, grid_max: f64) -> f64 {
        let h = 1e-4 * grid_max;
        let d = |x: f64| self.raw_derivative(x);
        (-11.0 * d(0.0) + 18.0 * d(h) - 9.0 * d(2.0 * h) + 2.0 * d(3.0 * h)) / (6.0 * h)
    }
}

/// One verified assumption: a pass flag plus the quantitative evidence.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AssumptionCheck {
    pub pass: bool,
    pub value: f64,
}

/// Outcome of checking A1-A5 on a sampling grid.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    /// A1; `value` is the largest relative mismatch between the supplied
    /// derivative and a central difference of the values.
    pub a1_smooth: AssumptionCheck,
    /// A2; `value` is `f'(0)`.
    pub a2_positive: AssumptionCheck,
    /// A3; `value` is the grid minimum of `f(I) - I f'(I)`.
    pub a3_bound: AssumptionCheck,
    /// A4; `value` is the `f''(0)` used for the decision.
    pub a4_concavity: AssumptionCheck,
    /// A5: a located epsilon such that the quadratic lower bound holds on
    /// `(0, epsilon)` within the reporting tolerance, or `None` if the
    /// search reached its floor without success.
    pub a5_epsilon_star: Option<f64>,
    pub f_prime_zero: f64,
    pub f_second_zero: f64,
    /// Finite-difference cross-estimate of `f''(0)` (informational).
    pub f_second_zero_fd: f64,
    pub grid: Vec<f64>,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.a1_smooth.pass
            && self.a2_positive.pass
            && self.a3_bound.pass
            && self.a4_concavity.pass
            && self.a5_epsilon_star.is_some()
    }
}

/// Relative comparison tolerance: all assumption inequalities are tested up
/// to this fraction of the local term magnitudes, and exact equality passes.
const REL_TOL: f64 = 1e-9;

/// Largest acceptable A1 derivative/finite-difference relative mismatch.
const A1_TOL: f64 = 1e-6;

/// Verifies A1-A5 for `f` on a geometric-plus-linear grid over `[0, grid_max]`.
///
/// Failures are reported, not raised; the only errors are precondition
/// violations on the grid itself.
pub fn check_assumptions(
    f: &IncidenceFunction,
    grid_max: f64,
    grid_points: usize,
) -> Result<AssumptionReport> {
    if !grid_max.is_finite() || grid_max <= 0.0 {
        return Err(Error::Domain(format!(
            "grid_max must be positive and finite, got {grid_max}"
        )));
    }
    if grid_points < 16 {
        return Err(Error::Domain(format!(
            "grid_points must be at least 16, got {grid_points}"
        )));
    }

    let grid = build_grid(grid_max, grid_points);
    let fp0 = f.prime_at_zero();
    let f2z = f.second_at_zero(grid_max);
    let f2z_fd = f.second_at_zero_fd(grid_max);

    // A1: consistency between the supplied derivative and a central
    // difference of the values. A numerical check cannot certify global
    // smoothness; it can only bound the observed inconsistency. The step is
    // proportional to the evaluation point so the stencil stays inside the
    // local curvature scale of saturating kinds.
    let mut a1_worst = 0.0f64;
    for &i in grid.iter().filter(|&&i| i > 0.0) {
        let h = 1e-4 * i;
        if h <= 0.0 {
            continue;
        }
        let fd = (f.raw_value(i + h) - f.raw_value(i - h)) / (2.0 * h);
        let d = f.raw_derivative(i);
        let scale = d.abs().max(fp0.abs()).max(1e-300);
        a1_worst = a1_worst.max((fd - d).abs() / scale);
    }
    let a1 = AssumptionCheck {
        pass: a1_worst <= A1_TOL,
        value: a1_worst,
    };

    // A2: f(0) = 0 exactly, f'(0) > 0, f > 0 away from 0.
    let a2_pass = f.raw_value(0.0) == 0.0
        && fp0 > 0.0
        && grid
            .iter()
            .filter(|&&i| i > 0.0)
            .all(|&i| f.raw_value(i) > 0.0);
    let a2 = AssumptionCheck {
        pass: a2_pass,
        value: fp0,
    };

    // A3: f(I) - I f'(I) >= 0 up to the reporting tolerance.
    let mut a3_min = f64::INFINITY;
    let mut a3_pass = true;
    for &i in &grid {
        let v = f.raw_value(i);
        let d = f.raw_derivative(i);
        let bound = v - i * d;
        a3_min = a3_min.min(bound);
        if bound < -REL_TOL * (v.abs() + (i * d).abs()) {
            a3_pass = false;
        }
    }
    let a3 = AssumptionCheck {
        pass: a3_pass,
        value: a3_min,
    };

    // A4: f''(0) <= 0, with headroom for finite-difference noise on
    // external kinds.
    let a4_tol = 1e-6 * fp0.abs() / grid_max;
    let a4 = AssumptionCheck {
        pass: f2z <= a4_tol,
        value: f2z,
    };

    // A5: halving search for a neighborhood where the quadratic lower bound
    // holds at 64 sample points.
    let a5 = a5_search(f, grid_max, fp0, f2z);

    Ok(AssumptionReport {
        a1_smooth: a1,
        a2_positive: a2,
        a3_bound: a3,
        a4_concavity: a4,
        a5_epsilon_star: a5,
        f_prime_zero: fp0,
        f_second_zero: f2z,
        f_second_zero_fd: f2z_fd,
        grid,
    })
}

/// Tests `f(I) >= f(0) + I f'(0) + I^2 f''(0) / 2` on 64 points of
/// `(0, eps]`, within the reporting tolerance.
fn quadratic_bound_holds(f: &IncidenceFunction, eps: f64, fp0: f64, f2z: f64) -> bool {
    let f0 = f.raw_value(0.0);
    for j in 1..=64 {
        let i = eps * j as f64 / 64.0;
        let linear = i * fp0;
        let quad = 0.5 * i * i * f2z;
        let bound = f0 + linear + quad;
        let tol = REL_TOL * (f.raw_value(i).abs() + linear.abs() + quad.abs());
        if f.raw_value(i) + tol < bound {
            return false;
        }
    }
    true
}

fn a5_search(f: &IncidenceFunction, grid_max: f64, fp0: f64, f2z: f64) -> Option<f64> {
    let floor = 1e-12 * grid_max;
    let mut eps = grid_max / 100.0;
    while eps >= floor {
        if quadratic_bound_holds(f, eps, fp0, f2z) {
            return Some(eps);
        }
        eps *= 0.5;
    }
    None
}

/// Equally spaced points on `[0, grid_max]` plus a geometric tail clustering
/// toward 0, sorted and deduplicated.
fn build_grid(grid_max: f64, grid_points: usize) -> Vec<f64> {
    let mut grid = Vec::with_capacity(grid_points + 48);
    grid.push(0.0);
    for j in 1..=grid_points {
        grid.push(grid_max * j as f64 / grid_points as f64);
    }
    let mut g = 0.5 * grid_max;
    while g >= 1e-12 * grid_max {
        grid.push(g);
        g *= 0.5;
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    grid
}
