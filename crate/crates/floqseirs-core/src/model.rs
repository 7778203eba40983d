//! Model parameters, periodic coefficients, and the right-hand sides of the
//! full SEIRS system and its reduced three-compartment form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::incidence::IncidenceFunction;

/// A positive periodic rate. The three forms keep configurations
/// serializable so runs are reproducible from a config file alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum PeriodicCoefficient {
    /// Constant rate; periodic with every period.
    Constant { offset: f64 },
    /// `offset + amplitude * cos(2 pi t / period)`.
    Cosine {
        offset: f64,
        amplitude: f64,
        period: f64,
    },
    /// Equally spaced samples over one period, linearly interpolated and
    /// wrapped periodically.
    Tabulated { samples: Vec<f64>, period: f64 },
}

impl PeriodicCoefficient {
    pub fn constant(offset: f64) -> Self {
        Self::Constant { offset }
    }

    pub fn cosine(offset: f64, amplitude: f64, period: f64) -> Self {
        Self::Cosine {
            offset,
            amplitude,
            period,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Self::Constant { offset } => *offset,
            Self::Cosine {
                offset,
                amplitude,
                period,
            } => offset + amplitude * (2.0 * std::f64::consts::PI * t / period).cos(),
            Self::Tabulated { samples, period } => {
                let n = samples.len();
                if n == 1 {
                    return samples[0];
                }
                let u = t.rem_euclid(*period) / period * n as f64;
                let k = (u.floor() as usize).min(n - 1);
                let frac = u - k as f64;
                let next = samples[(k + 1) % n];
                samples[k] + frac * (next - samples[k])
            }
        }
    }

    /// The intrinsic period; `None` for constants (periodic with any period).
    pub fn period(&self) -> Option<f64> {
        match self {
            Self::Constant { .. } => None,
            Self::Cosine { period, .. } | Self::Tabulated { period, .. } => Some(*period),
        }
    }

    /// Baseline level: the `offset` for constant/cosine forms, the sample
    /// mean for tabulated ones.
    pub fn offset(&self) -> f64 {
        match self {
            Self::Constant { offset } | Self::Cosine { offset, .. } => *offset,
            Self::Tabulated { samples, .. } => {
                samples.iter().sum::<f64>() / samples.len().max(1) as f64
            }
        }
    }

    /// Replaces the baseline level, used by parameter sweeps. Fails for
    /// tabulated coefficients, which have no single offset to shift.
    pub fn with_offset(&self, offset: f64) -> Result<Self> {
        match self {
            Self::Constant { .. } => Ok(Self::Constant { offset }),
            Self::Cosine {
                amplitude, period, ..
            } => Ok(Self::Cosine {
                offset,
                amplitude: *amplitude,
                period: *period,
            }),
            Self::Tabulated { .. } => Err(Error::Domain(
                "cannot sweep the offset of a tabulated coefficient".into(),
            )),
        }
    }

    fn min_sampled(&self, over_period: f64, points: usize) -> f64 {
        (0..points)
            .map(|j| self.value(over_period * j as f64 / points as f64))
            .fold(f64::INFINITY, f64::min)
    }
}

/// All scalar rates plus the two periodic coefficients and the common
/// period `LT`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Total population, constant along trajectories.
    #[serde(rename = "N")]
    pub n: f64,
    /// Common per-capita birth and death rate, per year.
    pub mu: f64,
    /// Fraction of newborns vaccinated, in [0, 1].
    pub p: f64,
    /// Rate of leaving the latent stage, per year.
    pub sigma: f64,
    /// Rate of leaving the infectious stage, per year.
    pub gamma: f64,
    /// Rate of immunity loss, per year (0 disables the R -> S flow).
    pub delta: f64,
    /// Transmission rate, T-periodic with T dividing `period_lt`.
    pub beta: PeriodicCoefficient,
    /// Susceptible vaccination rate, LT-periodic.
    pub r: PeriodicCoefficient,
    /// The common model period LT, years.
    pub period_lt: f64,
}

/// Sampling density used when verifying coefficient positivity.
const POSITIVITY_SAMPLES: usize = 256;

/// Relative tolerance on the `S + E + I <= N` domain check.
const SUM_TOL: f64 = 1e-9;

/// States more negative than this fraction of N are treated as a domain
/// violation rather than integrator noise.
const NEG_TOL: f64 = 1e-6;

/// Collected invariant violations; empty means the parameters are usable.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every `ModelParams` invariant, sampling the periodic coefficients
/// for positivity. Violations are listed, not raised.
pub fn validate(params: &ModelParams) -> ValidationReport {
    let mut v = Vec::new();
    if !params.n.is_finite() || params.n <= 0.0 {
        v.push(format!("N must be positive, got {}", params.n));
    }
    for (name, value) in [
        ("mu", params.mu),
        ("sigma", params.sigma),
        ("gamma", params.gamma),
    ] {
        if !value.is_finite() || value <= 0.0 {
            v.push(format!("{name} must be positive, got {value}"));
        }
    }
    if !params.delta.is_finite() || params.delta < 0.0 {
        v.push(format!("delta must be non-negative, got {}", params.delta));
    }
    if params.p.is_nan() || !(0.0..=1.0).contains(&params.p) {
        v.push(format!("p must lie in [0, 1], got {}", params.p));
    }
    if !params.period_lt.is_finite() || params.period_lt <= 0.0 {
        v.push(format!(
            "period_lt must be positive, got {}",
            params.period_lt
        ));
    }

    if let PeriodicCoefficient::Tabulated { samples, .. } = &params.beta {
        if samples.len() < 2 {
            v.push("tabulated beta needs at least 2 samples".into());
        }
    }
    if let PeriodicCoefficient::Tabulated { samples, .. } = &params.r {
        if samples.len() < 2 {
            v.push("tabulated r needs at least 2 samples".into());
        }
    }

    if params.period_lt > 0.0 {
        // beta(t) >= 0; the zero-transmission degenerate case is admitted so
        // that the no-epidemic flow stays runnable end to end.
        let beta_min = params
            .beta
            .min_sampled(params.period_lt, POSITIVITY_SAMPLES);
        if !beta_min.is_finite() || beta_min < 0.0 {
            v.push(format!(
                "beta(t) must be non-negative; sampled minimum {beta_min}"
            ));
        }
        let r_min = params.r.min_sampled(params.period_lt, POSITIVITY_SAMPLES);
        if !r_min.is_finite() || r_min <= 0.0 {
            v.push(format!("r(t) must be positive; sampled minimum {r_min}"));
        }
    }

    // beta's period must divide LT; r must share LT itself.
    if let Some(t_beta) = params.beta.period() {
        if t_beta.is_nan() || t_beta <= 0.0 {
            v.push(format!("beta period must be positive, got {t_beta}"));
        } else {
            let ratio = params.period_lt / t_beta;
            if (ratio - ratio.round()).abs() > 1e-9 * ratio.abs().max(1.0) || ratio < 0.5 {
                v.push(format!(
                    "beta period {t_beta} does not divide period_lt {}",
                    params.period_lt
                ));
            }
        }
    }
    if let Some(t_r) = params.r.period() {
        if (t_r - params.period_lt).abs() > 1e-9 * params.period_lt.abs() {
            v.push(format!(
                "r period {t_r} must equal period_lt {}",
                params.period_lt
            ));
        }
    }

    ValidationReport { violations: v }
}

/// Full four-compartment state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State4 {
    pub s: f64,
    pub e: f64,
    pub i: f64,
    pub r: f64,
}

/// Reduced state with `R = N - S - E - I` eliminated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State3 {
    pub s: f64,
    pub e: f64,
    pub i: f64,
}

impl State4 {
    pub fn new(s: f64, e: f64, i: f64, r: f64) -> Self {
        Self { s, e, i, r }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.s, self.e, self.i, self.r]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn total(&self) -> f64 {
        self.s + self.e + self.i + self.r
    }
}

impl State3 {
    pub fn new(s: f64, e: f64, i: f64) -> Self {
        Self { s, e, i }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.s, self.e, self.i]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

fn check_non_negative(components: &[(&str, f64)], n: f64) -> Result<()> {
    for (name, value) in components {
        if *value < -NEG_TOL * n {
            return Err(Error::Domain(format!(
                "state component {name} = {value} is negative"
            )));
        }
    }
    Ok(())
}

/// Right-hand side of the full SEIRS system.
pub fn rhs_full(params: &ModelParams, f: &IncidenceFunction, t: f64, x: &State4) -> Result<State4> {
    check_non_negative(&[("S", x.s), ("E", x.e), ("I", x.i), ("R", x.r)], params.n)?;
    let beta = params.beta.value(t);
    let r = params.r.value(t);
    let transmission = beta * x.s * f.eval_extended(x.i);
    let ds = params.mu * params.n * (1.0 - params.p) - transmission - (params.mu + r) * x.s
        + params.delta * x.r;
    let de = transmission - (params.mu + params.sigma) * x.e;
    let di = params.sigma * x.e - (params.mu + params.gamma) * x.i;
    let dr = params.mu * params.n * params.p + r * x.s + params.gamma * x.i
        - (params.mu + params.delta) * x.r;
    Ok(State4::new(ds, de, di, dr))
}

/// Right-hand side of the reduced system, with `R = N - S - E - I`
/// substituted into the immunity-loss term.
pub fn rhs_reduced(
    params: &ModelParams,
    f: &IncidenceFunction,
    t: f64,
    x: &State3,
) -> Result<State3> {
    check_non_negative(&[("S", x.s), ("E", x.e), ("I", x.i)], params.n)?;
    let sum = x.s + x.e + x.i;
    if sum > params.n * (1.0 + SUM_TOL) {
        return Err(Error::Domain(format!(
            "S + E + I = {sum} exceeds the total population {}",
            params.n
        )));
    }
    let beta = params.beta.value(t);
    let r = params.r.value(t);
    let transmission = beta * x.s * f.eval_extended(x.i);
    let ds = params.mu * params.n * (1.0 - params.p) - transmission - (params.mu + r) * x.s
        + params.delta * (params.n - sum);
    let de = transmission - (params.mu + params.sigma) * x.e;
    let di = params.sigma * x.e - (params.mu + params.gamma) * x.i;
    Ok(State3::new(ds, de, di))
}
