//! Run configuration: one JSON document holding the model parameters,
//! incidence selection, initial conditions, horizon, and solver settings.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use floqseirs_core::{model, IncidenceFunction, ModelParams, SolverConfig};

/// Errors surfaced to the command line, keyed to exit codes: config problems
/// exit 1, numerical failures 2, incidence assumption violations 3.
#[derive(Debug)]
pub enum AppError {
    Config(String),
    Core(floqseirs_core::Error),
    Io(std::io::Error),
}

impl fmt::Display for AppError {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Config(msg) => write!(out, "invalid configuration: {msg}"),
            AppError::Core(err) => write!(out, "{err}"),
            AppError::Io(err) => write!(out, "i/o error: {err}"),
        }
    }
}

impl std::error::Error for AppError {}

impl From<floqseirs_core::Error> for AppError {
    fn from(err: floqseirs_core::Error) -> Self {
        AppError::Core(err)
    }
}

impl From<std::io::Error> for AppError {
    fn from(err: std::io::Error) -> Self {
        AppError::Io(err)
    }
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 1,
            AppError::Core(floqseirs_core::Error::Assumption(_)) => 3,
            AppError::Core(_) => 2,
            AppError::Io(_) => 2,
        }
    }
}

/// Incidence selection as it appears in the JSON config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum IncidenceConfig {
    Bilinear,
    Saturated { a: f64 },
    PowerSaturated { k: f64, q: f64 },
}

impl IncidenceConfig {
    pub fn build(&self) -> Result<IncidenceFunction, AppError> {
        let built = match self {
            IncidenceConfig::Bilinear => Ok(IncidenceFunction::bilinear()),
            IncidenceConfig::Saturated { a } => IncidenceFunction::saturated(*a),
            IncidenceConfig::PowerSaturated { k, q } => IncidenceFunction::power_saturated(*k, *q),
        };
        built.map_err(|e| AppError::Config(e.to_string()))
    }
}

/// Initial compartment counts; the recovered compartment is derived as
/// `N - S0 - E0 - I0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialConditions {
    #[serde(rename = "S0")]
    pub s0: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
    #[serde(rename = "I0")]
    pub i0: f64,
}

fn default_horizon() -> f64 {
    100.0
}

fn default_sample_interval() -> f64 {
    0.01
}

/// The complete run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub params: ModelParams,
    pub incidence: IncidenceConfig,
    pub initial: InitialConditions,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_sample_interval")]
    pub sample_interval: f64,
    /// Defaults to adaptive RK45 with tolerances scaled to N when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| AppError::Config(format!("cannot parse {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), AppError> {
        let report = model::validate(&self.params);
        if !report.is_valid() {
            return Err(AppError::Config(report.violations.join("; ")));
        }
        match &self.incidence {
            IncidenceConfig::Saturated { a } if !(*a >= 0.0 && a.is_finite()) => {
                return Err(AppError::Config(format!(
                    "incidence a must be >= 0, got {a}"
                )));
            }
            IncidenceConfig::PowerSaturated { k, q }
                if !(*k >= 0.0 && k.is_finite() && *q > 0.0 && q.is_finite()) =>
            {
                return Err(AppError::Config(format!(
                    "incidence requires k >= 0 and q > 0, got k = {k}, q = {q}"
                )));
            }
            _ => {}
        }
        let init = &self.initial;
        for (name, v) in [("S0", init.s0), ("E0", init.e0), ("I0", init.i0)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(AppError::Config(format!(
                    "initial condition {name} must be non-negative, got {v}"
                )));
            }
        }
        if init.s0 + init.e0 + init.i0 > self.params.n * (1.0 + 1e-12) {
            return Err(AppError::Config(format!(
                "S0 + E0 + I0 = {} exceeds N = {}",
                init.s0 + init.e0 + init.i0,
                self.params.n
            )));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(AppError::Config(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if !(self.sample_interval > 0.0 && self.sample_interval.is_finite()) {
            return Err(AppError::Config(format!(
                "sample_interval must be positive, got {}",
                self.sample_interval
            )));
        }
        if let Some(solver) = &self.solver {
            solver.validate().map_err(AppError::Config)?;
        }
        Ok(())
    }

    pub fn incidence(&self) -> Result<IncidenceFunction, AppError> {
        self.incidence.build()
    }

    /// The solver for state-space simulation runs.
    pub fn solver(&self) -> SolverConfig {
        self.solver
            .unwrap_or_else(|| SolverConfig::for_state_scale(self.params.n))
    }

    /// Derived initial recovered count.
    pub fn initial_recovered(&self) -> f64 {
        self.params.n - self.initial.s0 - self.initial.e0 - self.initial.i0
    }
}

/// Formats a number with 17 significant digits so runs are byte-comparable.
pub fn fmt_full(x: f64) -> String {
    format!("{x:.16e}")
}
