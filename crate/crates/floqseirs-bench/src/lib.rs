//! Shared fixtures for the benchmark targets.

use floqseirs_core::{IncidenceFunction, ModelParams, PeriodicCoefficient};

/// The seasonally forced parameter set used throughout the benchmarks.
pub fn example_params(beta0: f64) -> ModelParams {
    ModelParams {
        n: 2_200_000.0,
        mu: 0.02,
        p: 0.85,
        sigma: 38.5,
        gamma: 100.0,
        delta: 0.0,
        beta: PeriodicCoefficient::cosine(beta0, 0.0002, 1.0),
        r: PeriodicCoefficient::cosine(0.1, 0.004, 1.0),
        period_lt: 1.0,
    }
}

pub fn incidence() -> IncidenceFunction {
    IncidenceFunction::saturated(0.001).expect("valid saturation constant")
}
