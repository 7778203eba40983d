//! Evolution operators and monodromy matrices of 2x2 linear systems, Floquet
//! exponents, and the Poincare map of the reduced model.

use super::matrix::Matrix2;
use super::rk::final_state;
use super::SolverConfig;
use crate::error::{Error, Result};
use crate::incidence::IncidenceFunction;
use crate::model::{rhs_reduced, ModelParams, State3};

/// Fundamental solution of `dY/dt = A(t) Y` over `[t0, t1]` with `Y(t0) = I`.
///
/// Both columns are integrated together as one 4-dimensional system so the
/// step controller sees the coupled error.
pub fn evolution_operator<A>(a: A, t0: f64, t1: f64, cfg: &SolverConfig) -> Result<Matrix2>
where
    A: Fn(f64) -> Matrix2,
{
    if t1 < t0 {
        return Err(Error::Domain(format!(
            "evolution operator requires t1 >= t0 (got [{t0}, {t1}])"
        )));
    }
    if t1 == t0 {
        return Ok(Matrix2::identity());
    }
    // State layout: [y11, y21, y12, y22] (two stacked columns).
    let rhs = |t: f64, y: &[f64; 4]| -> Result<[f64; 4]> {
        let m = a(t);
        Ok([
            m.m11 * y[0] + m.m12 * y[1],
            m.m21 * y[0] + m.m22 * y[1],
            m.m11 * y[2] + m.m12 * y[3],
            m.m21 * y[2] + m.m22 * y[3],
        ])
    };
    let y = final_state(rhs, [1.0, 0.0, 0.0, 1.0], t0, t1, cfg)?;
    Ok(Matrix2::new(y[0], y[2], y[1], y[3]))
}

/// Monodromy matrix of an `omega`-periodic generator: the evolution operator
/// over one full period starting from the identity.
pub fn monodromy<A>(a: A, omega: f64, cfg: &SolverConfig) -> Result<Matrix2>
where
    A: Fn(f64) -> Matrix2,
{
    evolution_operator(a, 0.0, omega, cfg)
}

/// Principal Floquet exponent `p = ln(rho(monodromy)) / omega`.
pub fn floquet_exponent<A>(a: A, omega: f64, cfg: &SolverConfig) -> Result<f64>
where
    A: Fn(f64) -> Matrix2,
{
    let rho = monodromy(a, omega, cfg)?.spectral_radius();
    if rho <= 0.0 {
        return Err(Error::Numerical(format!(
            "degenerate monodromy: spectral radius {rho} has no logarithm"
        )));
    }
    Ok(rho.ln() / omega)
}

/// Poincare map of the reduced system: the solution at time `LT` started
/// from `x0` at time 0.
pub fn poincare_map(
    params: &ModelParams,
    f: &IncidenceFunction,
    x0: State3,
    cfg: &SolverConfig,
) -> Result<State3> {
    let rhs = |t: f64, y: &[f64; 3]| {
        rhs_reduced(params, f, t, &State3::from_array(*y)).map(|d| d.to_array())
    };
    let y = final_state(rhs, x0.to_array(), 0.0, params.period_lt, cfg)?;
    Ok(State3::from_array(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_generator_gives_identity() {
        let cfg = SolverConfig::operator_default();
        let m = evolution_operator(|_| Matrix2::zeros(), 0.0, 1.0, &cfg).unwrap();
        assert_eq!(m, Matrix2::identity());
    }

    #[test]
    fn empty_interval_gives_identity() {
        let cfg = SolverConfig::operator_default();
        let m = evolution_operator(|_| Matrix2::new(1.0, 2.0, 3.0, 4.0), 2.0, 2.0, &cfg).unwrap();
        assert_eq!(m, Matrix2::identity());
    }

    #[test]
    fn constant_diagonal_monodromy() {
        let cfg = SolverConfig::operator_default();
        let m = monodromy(|_| Matrix2::diagonal(-1.0, -2.0), 1.0, &cfg).unwrap();
        assert_relative_eq!(m.m11, (-1.0f64).exp(), max_relative = 1e-10);
        assert_relative_eq!(m.m22, (-2.0f64).exp(), max_relative = 1e-10);
        assert!(m.m12.abs() < 1e-14 && m.m21.abs() < 1e-14);
        assert_relative_eq!(m.spectral_radius(), (-1.0f64).exp(), max_relative = 1e-10);
    }

    #[test]
    fn constant_generator_eigenvalue_moduli() {
        // For constant A the Floquet multipliers are exp(omega * eig(A)).
        let cfg = SolverConfig::operator_default();
        let m = monodromy(|_| Matrix2::new(-1.0, 0.0, 0.5, -2.0), 1.0, &cfg).unwrap();
        let ev = m.eigenvalue_moduli();
        assert_relative_eq!(ev[0], (-1.0f64).exp(), max_relative = 1e-9);
        assert_relative_eq!(ev[1], (-2.0f64).exp(), max_relative = 1e-9);
    }

    #[test]
    fn complex_spectrum_moduli_follow_the_real_part() {
        // A with eigenvalues -1 +- 2i: both multiplier moduli are exp(-1).
        let cfg = SolverConfig::operator_default();
        let m = monodromy(|_| Matrix2::new(-1.0, 2.0, -2.0, -1.0), 1.0, &cfg).unwrap();
        let ev = m.eigenvalue_moduli();
        assert_relative_eq!(ev[0], (-1.0f64).exp(), max_relative = 1e-9);
        assert_relative_eq!(ev[1], (-1.0f64).exp(), max_relative = 1e-9);
    }

    #[test]
    fn cocycle_property() {
        let cfg = SolverConfig::operator_default();
        let a = |t: f64| {
            Matrix2::new(
                -0.5,
                0.8 + 0.1 * (2.0 * std::f64::consts::PI * t).cos(),
                0.3,
                -1.2,
            )
        };
        let full = evolution_operator(a, 0.0, 1.0, &cfg).unwrap();
        let first = evolution_operator(a, 0.0, 0.4, &cfg).unwrap();
        let second = evolution_operator(a, 0.4, 1.0, &cfg).unwrap();
        let composed = second * first;
        for (x, y) in [
            (full.m11, composed.m11),
            (full.m12, composed.m12),
            (full.m21, composed.m21),
            (full.m22, composed.m22),
        ] {
            assert_relative_eq!(x, y, max_relative = 1e-8);
        }
    }

    #[test]
    fn floquet_exponent_constant_diagonal() {
        let cfg = SolverConfig::operator_default();
        let p = floquet_exponent(|_| Matrix2::diagonal(-1.0, -2.0), 1.0, &cfg).unwrap();
        assert_relative_eq!(p, -1.0, max_relative = 1e-9);
    }

    #[test]
    fn floquet_mode_returns_scaled_eigenvector() {
        // Integrating one period from the dominant eigenvector multiplies it
        // by exp(p * omega).
        let cfg = SolverConfig::operator_default();
        let a = |t: f64| {
            Matrix2::new(
                -38.52,
                99.0 + 11.0 * (2.0 * std::f64::consts::PI * t).cos(),
                38.5,
                -100.02,
            )
        };
        let omega = 1.0;
        let m = monodromy(a, omega, &cfg).unwrap();
        let (lambda, v) = m.dominant_real_eigenpair().unwrap();
        let p = floquet_exponent(a, omega, &cfg).unwrap();
        assert_relative_eq!(lambda, (p * omega).exp(), max_relative = 1e-10);
        let rhs = |t: f64, y: &[f64; 2]| {
            let mt = a(t);
            Ok(mt.apply(*y))
        };
        let out = final_state(rhs, v, 0.0, omega, &cfg).unwrap();
        assert_relative_eq!(out[0], lambda * v[0], max_relative = 1e-8);
        assert_relative_eq!(out[1], lambda * v[1], max_relative = 1e-8);
    }
}
