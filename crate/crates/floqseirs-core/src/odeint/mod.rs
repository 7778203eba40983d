//! Dense small-system ODE integration and the linear-systems toolkit built
//! on it: evolution operators, monodromy matrices, spectral radii, Floquet
//! exponents, and the Poincare map.

mod linear;
mod matrix;
mod rk;

pub use linear::{evolution_operator, floquet_exponent, monodromy, poincare_map};
pub use matrix::Matrix2;
pub use rk::{final_state, integrate, integrate_sampled};

use serde::{Deserialize, Serialize};

/// Stepping scheme and its error-control parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Method {
    /// Classic fourth-order Runge-Kutta with a fixed nominal step.
    FixedRk4 { step: f64 },
    /// Dormand-Prince 5(4) with adaptive step control.
    AdaptiveRk45 { abs_tol: f64, rel_tol: f64 },
}

/// Solver selection plus a global step budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    #[serde(flatten)]
    pub method: Method,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

fn default_max_steps() -> usize {
    10_000_000
}

impl SolverConfig {
    pub fn adaptive(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            method: Method::AdaptiveRk45 { abs_tol, rel_tol },
            max_steps: default_max_steps(),
        }
    }

    pub fn fixed(step: f64) -> Self {
        Self {
            method: Method::FixedRk4 { step },
            max_steps: default_max_steps(),
        }
    }

    /// Default tolerances for state-space simulation at the given magnitude:
    /// absolute floor 1e-10 of the scale, relative 1e-9.
    pub fn for_state_scale(scale: f64) -> Self {
        Self::adaptive(1e-10 * scale.abs().max(1e-30), 1e-9)
    }

    /// Tight, essentially relative-only control for evolution operators and
    /// periodic-solution construction, where entries span many decades.
    pub fn operator_default() -> Self {
        Self::adaptive(1e-60, 1e-12)
    }

    pub fn validate(&self) -> Result<(), String> {
        match self.method {
            Method::FixedRk4 { step } => {
                if !(step > 0.0 && step.is_finite()) {
                    return Err(format!(
                        "fixed step must be positive and finite, got {step}"
                    ));
                }
            }
            Method::AdaptiveRk45 { abs_tol, rel_tol } => {
                if !(abs_tol > 0.0 && abs_tol.is_finite()) {
                    return Err(format!(
                        "abs_tol must be positive and finite, got {abs_tol}"
                    ));
                }
                if !(rel_tol > 0.0 && rel_tol.is_finite()) {
                    return Err(format!(
                        "rel_tol must be positive and finite, got {rel_tol}"
                    ));
                }
            }
        }
        if self.max_steps == 0 {
            return Err("max_steps must be positive".into());
        }
        Ok(())
    }
}

/// Counters reported alongside every integration run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SolverStats {
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Time-stamped states from one integration run.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    /// Strictly increasing sample times.
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub stats: SolverStats,
}

impl<const N: usize> Trajectory<N> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> Option<&[f64; N]> {
        self.states.last()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64; N])> {
        self.times.iter().copied().zip(self.states.iter())
    }
}
