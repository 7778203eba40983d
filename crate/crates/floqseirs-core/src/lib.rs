//! Seasonally forced SEIRS epidemic model with general nonlinear incidence:
//! simulation of the full and reduced systems, the disease-free periodic
//! solution, next-generation matrices, and both reproduction numbers (the
//! time-averaged estimate and the true periodic threshold obtained from the
//! evolution-operator root solve).

pub mod dfe;
pub mod error;
pub mod incidence;
pub mod model;
pub mod odeint;
pub mod quadrature;
pub mod reproduction;

pub use dfe::{ConstructionMethod, PeriodicSolution};
pub use error::{Error, Result};
pub use incidence::{AssumptionCheck, AssumptionReport, IncidenceFunction};
pub use model::{ModelParams, PeriodicCoefficient, State3, State4, ValidationReport};
pub use odeint::{Matrix2, Method, SolverConfig, SolverStats, Trajectory};
pub use reproduction::{Classification, NgmAssembly, R0Report};
