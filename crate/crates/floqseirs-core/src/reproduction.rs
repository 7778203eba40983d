//! Next-generation matrices around the disease-free solution, the
//! time-averaged reproduction number, the true periodic reproduction number
//! via the evolution-operator root solve, and the perturbed-monodromy
//! certificates behind the extinction/persistence results.

use serde::Serialize;

use crate::dfe::{s_hat_solution, PeriodicSolution};
use crate::error::{Error, Result};
use crate::incidence::IncidenceFunction;
use crate::model::ModelParams;
use crate::odeint::{evolution_operator, Matrix2, SolverConfig};
use crate::quadrature::adaptive_simpson;

/// Bisection budget: expansions of the initial bracket.
const BRACKET_EXPANSIONS: u32 = 8;
const BRACKET_GROWTH: f64 = 4.0;
const MAX_BISECTIONS: u32 = 200;

/// Linearization data around the disease-free periodic solution: the
/// new-infection matrix `F(t)`, the constant transition matrix `V`, and the
/// perturbation matrices `H(t)` and `K(t)`.
#[derive(Debug, Clone)]
pub struct NgmAssembly {
    params: ModelParams,
    f_prime0: f64,
    f_second0: f64,
    s_hat: PeriodicSolution,
}

impl NgmAssembly {
    /// Builds the evaluators against the disease-free solution constructed
    /// with `cfg`. Fails when `f'(0) <= 0`, which breaks the linearization.
    pub fn new(params: &ModelParams, f: &IncidenceFunction, cfg: &SolverConfig) -> Result<Self> {
        let f_prime0 = f.prime_at_zero();
        if !f_prime0.is_finite() || f_prime0 <= 0.0 {
            return Err(Error::Assumption(format!(
                "incidence must have f'(0) > 0, got {f_prime0}"
            )));
        }
        let s_hat = s_hat_solution(params, cfg)?;
        Ok(Self {
            params: params.clone(),
            f_prime0,
            f_second0: f.second_at_zero(params.n),
            s_hat,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn s_hat(&self) -> &PeriodicSolution {
        &self.s_hat
    }

    pub fn f_prime_zero(&self) -> f64 {
        self.f_prime0
    }

    /// New-infection matrix: only the (1,2) entry is populated, with
    /// `beta(t) S_hat(t) f'(0)`.
    pub fn f_matrix(&self, t: f64) -> Matrix2 {
        Matrix2::new(
            0.0,
            self.params.beta.value(t) * self.s_hat.value(t) * self.f_prime0,
            0.0,
            0.0,
        )
    }

    /// Transition matrix `V = [[mu+sigma, 0], [-sigma, mu+gamma]]`.
    pub fn v_matrix(&self) -> Matrix2 {
        Matrix2::new(
            self.params.mu + self.params.sigma,
            0.0,
            -self.params.sigma,
            self.params.mu + self.params.gamma,
        )
    }

    /// Extinction-side perturbation: only entry (1,2), `beta(t) f'(0)`.
    pub fn h_matrix(&self, t: f64) -> Matrix2 {
        Matrix2::new(0.0, self.params.beta.value(t) * self.f_prime0, 0.0, 0.0)
    }

    /// Persistence-side curvature correction: only entry (1,2),
    /// `-1/2 beta(t) f''(0) (S_hat(t) - eta)`, non-negative under concavity.
    pub fn k_matrix(&self, t: f64, eta: f64) -> Matrix2 {
        Matrix2::new(
            0.0,
            -0.5 * self.params.beta.value(t) * self.f_second0 * (self.s_hat.value(t) - eta),
            0.0,
            0.0,
        )
    }

    /// Time-averaged reproduction number: the spectral radius of the
    /// next-generation matrix built from period-averaged coefficients.
    pub fn r0_average(&self) -> f64 {
        let lt = self.params.period_lt;
        let beta_avg = adaptive_simpson(|t| self.params.beta.value(t), 0.0, lt, 1e-12 * lt) / lt;
        let s_avg = self.s_hat.mean();
        let f_avg = Matrix2::new(0.0, beta_avg * s_avg * self.f_prime0, 0.0, 0.0);
        match self.v_matrix().inverse() {
            Some(v_inv) => (f_avg * v_inv).spectral_radius(),
            // mu, sigma, gamma > 0 make V invertible; kept as a hard error
            // for malformed parameters that bypassed validation.
            None => f64::NAN,
        }
    }

    /// Spectral radius of the evolution operator of
    /// `dw/dt = (-V + F(t)/lambda) w` over one period.
    pub fn rho_w(&self, lambda: f64, cfg: &SolverConfig) -> Result<f64> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::Domain(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        let v = self.v_matrix();
        let generator = |t: f64| -v + self.f_matrix(t).scale(1.0 / lambda);
        let m = evolution_operator(generator, 0.0, self.params.period_lt, cfg)?;
        Ok(m.spectral_radius())
    }

    /// Spectral radius of the unperturbed monodromy `Phi_{F-V}(LT)`.
    pub fn rho_fv(&self, cfg: &SolverConfig) -> Result<f64> {
        self.rho_w(1.0, cfg)
    }

    /// Spectral radii of the two perturbed monodromies:
    /// `rho(Phi_{F-V+eps H})` and `rho(Phi_{F-V-eta H-alpha K})`.
    pub fn perturbed_rho(
        &self,
        epsilon: f64,
        eta: f64,
        alpha: f64,
        cfg: &SolverConfig,
    ) -> Result<(f64, f64)> {
        for (name, v) in [("epsilon", epsilon), ("eta", eta), ("alpha", alpha)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!(
                    "perturbation {name} must be non-negative, got {v}"
                )));
            }
        }
        if eta >= self.s_hat.min_value() {
            return Err(Error::Domain(format!(
                "eta = {eta} must stay below the minimum of the disease-free solution ({})",
                self.s_hat.min_value()
            )));
        }
        let v = self.v_matrix();
        let lt = self.params.period_lt;
        let upper = |t: f64| self.f_matrix(t) - v + self.h_matrix(t).scale(epsilon);
        let lower = |t: f64| {
            self.f_matrix(t) - v - self.h_matrix(t).scale(eta) - self.k_matrix(t, eta).scale(alpha)
        };
        let rho_up = evolution_operator(upper, 0.0, lt, cfg)?.spectral_radius();
        let rho_down = evolution_operator(lower, 0.0, lt, cfg)?.spectral_radius();
        Ok((rho_up, rho_down))
    }

    /// Solves `rho(W(LT, 0, lambda)) = 1` for the reproduction number by
    /// bracketing around the time-averaged estimate and bisecting.
    pub fn r0_solve(&self, tol: f64, cfg: &SolverConfig) -> Result<R0Report> {
        if !tol.is_finite() || tol <= 0.0 {
            return Err(Error::Domain(format!("tol must be positive, got {tol}")));
        }
        let r0_avg = self.r0_average();
        if r0_avg == 0.0 {
            // No transmission at all: the next-infection operator is zero
            // and every lambda gives rho < 1.
            return Ok(R0Report {
                r0: 0.0,
                r0_avg,
                bracket: (0.0, 0.0),
                iterations: 0,
                residual: f64::NAN,
                classification: Classification::Extinction,
            });
        }

        let mut iterations = 0u32;
        let mut lo = (r0_avg / 4.0).max(1e-6);
        let mut hi = 4.0 * r0_avg;
        let mut rho_lo = self.rho_w(lo, cfg)?;
        let mut rho_hi = self.rho_w(hi, cfg)?;
        let mut expansions = 0;
        while rho_lo < 1.0 && expansions < BRACKET_EXPANSIONS {
            lo /= BRACKET_GROWTH;
            rho_lo = self.rho_w(lo, cfg)?;
            expansions += 1;
            iterations += 1;
        }
        let mut expansions_hi = 0;
        while rho_hi > 1.0 && expansions_hi < BRACKET_EXPANSIONS {
            hi *= BRACKET_GROWTH;
            rho_hi = self.rho_w(hi, cfg)?;
            expansions_hi += 1;
            iterations += 1;
        }
        if rho_lo < 1.0 || rho_hi > 1.0 {
            return Err(Error::Numerical(format!(
                "no sign change for rho(W(lambda)) - 1 on [{lo:.6e}, {hi:.6e}] \
                 (rho = {rho_lo:.6e} .. {rho_hi:.6e}, r0_avg = {r0_avg:.6e})"
            )));
        }

        let mut width = hi - lo;
        while width > tol && iterations < MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            let rho_mid = self.rho_w(mid, cfg)?;
            if rho_mid >= 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            width = hi - lo;
            iterations += 1;
        }
        let r0 = 0.5 * (lo + hi);
        let residual = (self.rho_w(r0, cfg)? - 1.0).abs();
        let classification = if r0 < 1.0 - tol {
            Classification::Extinction
        } else if r0 > 1.0 + tol {
            Classification::Persistence
        } else {
            Classification::Critical
        };
        Ok(R0Report {
            r0,
            r0_avg,
            bracket: (lo, hi),
            iterations,
            residual,
            classification,
        })
    }
}

/// Threshold side implied by the solved reproduction number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Extinction,
    Persistence,
    Critical,
}

/// Solved reproduction number with its companion time-averaged value and
/// solver evidence.
#[derive(Debug, Clone, Serialize)]
pub struct R0Report {
    pub r0: f64,
    pub r0_avg: f64,
    pub bracket: (f64, f64),
    pub iterations: u32,
    /// `|rho(W(LT, 0, r0)) - 1|`; NaN (serialized as null) in the
    /// zero-transmission degenerate case where no root exists.
    pub residual: f64,
    pub classification: Classification,
}

/// Convenience wrapper: assembles against the disease-free solution and
/// returns the time-averaged reproduction number.
pub fn r0_average(params: &ModelParams, f: &IncidenceFunction) -> Result<f64> {
    Ok(NgmAssembly::new(params, f, &SolverConfig::operator_default())?.r0_average())
}

/// Convenience wrapper for one `rho(W)` evaluation.
pub fn rho_w(
    params: &ModelParams,
    f: &IncidenceFunction,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<f64> {
    NgmAssembly::new(params, f, cfg)?.rho_w(lambda, cfg)
}

/// Convenience wrapper for the full root solve.
pub fn r0_solve(
    params: &ModelParams,
    f: &IncidenceFunction,
    tol: f64,
    cfg: &SolverConfig,
) -> Result<R0Report> {
    NgmAssembly::new(params, f, cfg)?.r0_solve(tol, cfg)
}

/// Convenience wrapper for the perturbed monodromy pair.
pub fn perturbed_rho(
    params: &ModelParams,
    f: &IncidenceFunction,
    epsilon: f64,
    eta: f64,
    alpha: f64,
    cfg: &SolverConfig,
) -> Result<(f64, f64)> {
    NgmAssembly::new(params, f, cfg)?.perturbed_rho(epsilon, eta, alpha, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PeriodicCoefficient;
    use approx::assert_relative_eq;

    fn example_params(beta0: f64) -> ModelParams {
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

    fn constant_params(beta0: f64) -> ModelParams {
        let mut params = example_params(beta0);
        params.beta = PeriodicCoefficient::constant(beta0);
        params.r = PeriodicCoefficient::constant(0.1);
        params
    }

    fn assembly(beta0: f64) -> NgmAssembly {
        NgmAssembly::new(
            &example_params(beta0),
            &IncidenceFunction::saturated(0.001).unwrap(),
            &SolverConfig::operator_default(),
        )
        .unwrap()
    }

    #[test]
    fn v_matrix_entries() {
        let a = assembly(0.0018);
        let v = a.v_matrix();
        assert_eq!(v, Matrix2::new(38.52, 0.0, -38.5, 100.02));
    }

    #[test]
    fn f_matrix_at_zero_matches_coefficients() {
        // beta(0) = 0.0020, S_hat(0) ~ 54999.34, f'(0) = 1.
        let a = assembly(0.0018);
        let f0 = a.f_matrix(0.0);
        assert_eq!(f0.m11, 0.0);
        assert_eq!(f0.m21, 0.0);
        assert_eq!(f0.m22, 0.0);
        assert_relative_eq!(f0.m12, 109.99867, max_relative = 1e-4);
    }

    #[test]
    fn linearization_sees_only_the_initial_slope() {
        // Incidences sharing f'(0) produce identical F.
        let params = example_params(0.0018);
        let cfg = SolverConfig::operator_default();
        let a_bil = NgmAssembly::new(&params, &IncidenceFunction::bilinear(), &cfg).unwrap();
        let a_sat =
            NgmAssembly::new(&params, &IncidenceFunction::saturated(1.0).unwrap(), &cfg).unwrap();
        for j in 0..8 {
            let t = j as f64 / 8.0;
            assert_eq!(a_bil.f_matrix(t), a_sat.f_matrix(t));
        }
    }

    #[test]
    fn zero_initial_slope_is_rejected() {
        let params = example_params(0.0018);
        let flat = IncidenceFunction::external(|i| i * i, |i| 2.0 * i);
        let err = NgmAssembly::new(&params, &flat, &SolverConfig::operator_default()).unwrap_err();
        assert!(matches!(err, Error::Assumption(_)));
    }

    #[test]
    fn r0_average_matches_closed_form() {
        // Generic spectral-radius route against the rank-one closed form
        // [beta] [S_hat] f'(0) sigma / ((mu+sigma)(mu+gamma)), with the
        // averages taken independently here.
        let a = assembly(0.0018);
        let params = a.params();
        let beta_avg = adaptive_simpson(|t| params.beta.value(t), 0.0, 1.0, 1e-13);
        let s_avg = adaptive_simpson(|t| a.s_hat().value(t), 0.0, 1.0, 1e-7);
        let closed = beta_avg * s_avg * params.sigma
            / ((params.mu + params.sigma) * (params.mu + params.gamma));
        assert_relative_eq!(a.r0_average(), closed, max_relative = 1e-9);
    }

    #[test]
    fn r0_average_constant_coefficients() {
        // S* = 55000 exactly, so the classical ratio is available by hand.
        let params = constant_params(0.0018);
        let f = IncidenceFunction::saturated(0.001).unwrap();
        let expected = 0.0018 * 55_000.0 * 38.5 / (38.52 * 100.02);
        assert_relative_eq!(
            r0_average(&params, &f).unwrap(),
            expected,
            max_relative = 1e-9
        );
    }

    #[test]
    fn unreachable_root_reports_a_bracket_diagnostic() {
        // Transmission this faint pushes the root below the bracket floor,
        // so the solve must fail loudly instead of returning a midpoint.
        let mut params = example_params(0.0018);
        params.beta = PeriodicCoefficient::constant(1e-14);
        let f = IncidenceFunction::bilinear();
        let err = r0_solve(&params, &f, 1e-8, &SolverConfig::operator_default()).unwrap_err();
        match err {
            Error::Numerical(msg) => assert!(msg.contains("no sign change"), "{msg}"),
            other => panic!("expected a numerical failure, got {other:?}"),
        }
    }

    #[test]
    fn rho_w_collapses_to_transition_decay_for_large_lambda() {
        // F/lambda -> 0 leaves dy/dt = -V y, whose period map has spectral
        // radius exp(-(mu+sigma) LT).
        let a = assembly(0.0018);
        let rho = a.rho_w(1e6, &SolverConfig::operator_default()).unwrap();
        assert_relative_eq!(rho, (-38.52f64).exp(), max_relative = 1e-3);
    }

    #[test]
    fn rho_w_is_monotone_decreasing() {
        let a = assembly(0.0018);
        let cfg = SolverConfig::operator_default();
        let mut last = f64::INFINITY;
        for j in 0..10 {
            // Logarithmic grid spanning the default bracket.
            let lambda = 0.25 * (16.0f64).powf(j as f64 / 9.0);
            let rho = a.rho_w(lambda, &cfg).unwrap();
            assert!(rho < last, "rho not decreasing at lambda = {lambda}");
            last = rho;
        }
    }

    #[test]
    fn rho_w_against_frozen_coefficient_product() {
        // Independent route: product of exact matrix exponentials of the
        // generator frozen at panel midpoints.
        let a = assembly(0.0018);
        let cfg = SolverConfig::operator_default();
        for lambda in [0.9, 1.0, 1.2] {
            let direct = a.rho_w(lambda, &cfg).unwrap();
            let v = a.v_matrix();
            let n = 40_000;
            let h = 1.0 / n as f64;
            let mut m = Matrix2::identity();
            for k in 0..n {
                let t = (k as f64 + 0.5) * h;
                let gen = a.f_matrix(t).scale(1.0 / lambda) - v;
                m = expm2(gen.scale(h)) * m;
            }
            assert_relative_eq!(direct, m.spectral_radius(), max_relative = 1e-7);
        }
    }

    /// Closed-form exponential of a 2x2 matrix (test oracle).
    fn expm2(m: Matrix2) -> Matrix2 {
        let half_tr = 0.5 * m.trace();
        let b = m - Matrix2::diagonal(half_tr, half_tr);
        // Traceless b satisfies b^2 = -det(b) I, so exp(b) closes in I and b.
        let delta_sq = -b.determinant();
        let (cosh, sinc) = if delta_sq > 0.0 {
            let d = delta_sq.sqrt();
            (d.cosh(), d.sinh() / d)
        } else if delta_sq < 0.0 {
            let d = (-delta_sq).sqrt();
            (d.cos(), d.sin() / d)
        } else {
            (1.0, 1.0)
        };
        (Matrix2::identity().scale(cosh) + b.scale(sinc)).scale(half_tr.exp())
    }

    #[test]
    fn root_solve_example_one() {
        let a = assembly(0.0018);
        let report = a.r0_solve(1e-8, &SolverConfig::operator_default()).unwrap();
        assert!(
            report.r0 > 0.9862 && report.r0 < 0.9883,
            "r0 = {}",
            report.r0
        );
        assert!(report.residual <= 1e-6, "residual = {}", report.residual);
        assert!(report.bracket.0 <= report.r0 && report.r0 <= report.bracket.1);
        assert!(report.bracket.1 - report.bracket.0 <= 1e-8);
        assert_eq!(report.classification, Classification::Extinction);
        // The periodic threshold sits strictly below its time-averaged proxy.
        assert!(report.r0 < report.r0_avg);
    }

    #[test]
    fn root_solve_example_two() {
        let a = assembly(0.005);
        let report = a.r0_solve(1e-8, &SolverConfig::operator_default()).unwrap();
        assert!(report.r0 > 2.72 && report.r0 < 2.77, "r0 = {}", report.r0);
        assert!(report.residual <= 1e-6);
        assert_eq!(report.classification, Classification::Persistence);
    }

    #[test]
    fn constant_coefficients_collapse_to_the_classical_ratio() {
        let params = constant_params(0.0018);
        let f = IncidenceFunction::bilinear();
        let cfg = SolverConfig::operator_default();
        let report = r0_solve(&params, &f, 1e-9, &cfg).unwrap();
        assert_relative_eq!(report.r0, report.r0_avg, max_relative = 1e-6);
    }

    #[test]
    fn zero_transmission_degenerates_to_zero() {
        let mut params = example_params(0.0018);
        params.beta = PeriodicCoefficient::constant(0.0);
        let f = IncidenceFunction::bilinear();
        let report = r0_solve(&params, &f, 1e-8, &SolverConfig::operator_default()).unwrap();
        assert_eq!(report.r0, 0.0);
        assert_eq!(report.classification, Classification::Extinction);
        assert!(report.residual.is_nan());
    }

    #[test]
    fn rho_w_at_one_is_the_unperturbed_monodromy_radius() {
        let a = assembly(0.0018);
        let cfg = SolverConfig::operator_default();
        let via_w = a.rho_w(1.0, &cfg).unwrap();
        let (rho_up, rho_down) = a.perturbed_rho(0.0, 0.0, 0.0, &cfg).unwrap();
        assert_eq!(via_w, rho_up);
        assert_eq!(via_w, rho_down);
    }

    #[test]
    fn perturbed_radii_track_the_threshold_side() {
        let cfg = SolverConfig::operator_default();
        let (up1, down1) = assembly(0.0018).perturbed_rho(0.0, 0.0, 0.0, &cfg).unwrap();
        assert!(up1 < 1.0 && down1 < 1.0);
        let (up2, down2) = assembly(0.005).perturbed_rho(0.0, 0.0, 0.0, &cfg).unwrap();
        assert!(up2 > 1.0 && down2 > 1.0);
    }

    #[test]
    fn extinction_margin_survives_small_epsilon() {
        // Continuity of the spectrum: small epsilon keeps rho < 1 on the
        // extinction side, and rho grows with epsilon.
        let a = assembly(0.0018);
        let cfg = SolverConfig::operator_default();
        let mut last = 0.0;
        for eps in [0.0, 1e-6, 1e-4, 1e-2] {
            let (rho, _) = a.perturbed_rho(eps, 0.0, 0.0, &cfg).unwrap();
            assert!(rho < 1.0, "rho({eps}) = {rho}");
            assert!(rho >= last);
            last = rho;
        }
    }

    #[test]
    fn persistence_margin_survives_small_eta_alpha() {
        let a = assembly(0.005);
        let cfg = SolverConfig::operator_default();
        let (_, rho) = a.perturbed_rho(0.0, 1.0, 1e-3, &cfg).unwrap();
        assert!(rho > 1.0, "rho = {rho}");
    }

    #[test]
    fn tabulated_transmission_matches_its_cosine_source() {
        // Tabulating the cosine on 64 samples perturbs the threshold only
        // at the interpolation-error scale.
        let cfg = SolverConfig::operator_default();
        let f = IncidenceFunction::saturated(0.001).unwrap();
        let cosine = assembly(0.0018);
        let cosine_report = cosine.r0_solve(1e-8, &cfg).unwrap();

        let mut params = example_params(0.0018);
        let samples: Vec<f64> = (0..64)
            .map(|k| 0.0018 + 0.0002 * (2.0 * std::f64::consts::PI * k as f64 / 64.0).cos())
            .collect();
        params.beta = PeriodicCoefficient::Tabulated {
            samples,
            period: 1.0,
        };
        assert!(crate::model::validate(&params).is_valid());
        let tab_report = r0_solve(&params, &f, 1e-8, &cfg).unwrap();
        assert_relative_eq!(tab_report.r0_avg, cosine_report.r0_avg, max_relative = 1e-6);
        assert_relative_eq!(tab_report.r0, cosine_report.r0, max_relative = 1e-3);
        assert_eq!(tab_report.classification, Classification::Extinction);
    }

    #[test]
    fn sub_period_transmission_is_solved_over_the_common_period() {
        // beta with period 1/2 inside LT = 1 (two seasonal pulses per
        // vaccination cycle).
        let mut params = example_params(0.0018);
        params.beta = PeriodicCoefficient::cosine(0.0018, 0.0002, 0.5);
        assert!(crate::model::validate(&params).is_valid());
        let f = IncidenceFunction::saturated(0.001).unwrap();
        let cfg = SolverConfig::operator_default();
        let report = r0_solve(&params, &f, 1e-8, &cfg).unwrap();
        assert!(report.r0.is_finite() && report.r0 > 0.9 && report.r0 < 1.1);
        assert!(report.residual <= 1e-6);
        // The offset alone fixes the average; the faster modulation only
        // moves the periodic threshold.
        assert_relative_eq!(report.r0_avg, 0.9892883241, max_relative = 1e-6);
    }

    #[test]
    fn threshold_depends_only_on_the_initial_slope() {
        // Every incidence with f'(0) = 1 linearizes identically, so the
        // solved threshold matches across the whole saturation ladder.
        let params = example_params(0.0018);
        let cfg = SolverConfig::operator_default();
        let reference = r0_solve(&params, &IncidenceFunction::bilinear(), 1e-7, &cfg)
            .unwrap()
            .r0;
        for a in [0.0, 0.001, 1.0] {
            let f = IncidenceFunction::saturated(a).unwrap();
            let r0 = r0_solve(&params, &f, 1e-7, &cfg).unwrap().r0;
            assert!(
                (r0 - reference).abs() <= 1e-6 * reference,
                "a = {a}: {r0} vs {reference}"
            );
        }
    }

    #[test]
    fn eta_above_the_solution_minimum_is_rejected() {
        let a = assembly(0.005);
        let err = a
            .perturbed_rho(0.0, 60_000.0, 0.0, &SolverConfig::operator_default())
            .unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn k_matrix_is_nonnegative_under_concavity() {
        let a = assembly(0.005);
        let eta = crate::dfe::eta_selection(a.s_hat());
        for j in 0..32 {
            let t = j as f64 / 32.0;
            let k = a.k_matrix(t, eta);
            assert!(k.m12 >= 0.0);
            assert_eq!(k.m11, 0.0);
            assert_eq!(k.m21, 0.0);
            assert_eq!(k.m22, 0.0);
        }
    }
}
