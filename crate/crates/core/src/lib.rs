//! Quasi-static, one-way-coupled poromechanical simulator for fault
//! reactivation screening in a compartmentalized depleted-gas-storage
//! reservoir.
//!
//! The library builds a conceptual two-block reservoir model bounded by five
//! faults, loads it with per-block pore-pressure schedules for CH4/CO2/N2/H2
//! storage operations, enforces Coulomb frictional contact on the faults with
//! Lagrange multipliers, and reports stability diagnostics (criticality index
//! chi, activated area t80, cumulative sliding) per fault and loading step.
//! A rule engine translates primary-production reactivation history into safe
//! operational pressure bandwidths.

pub mod bandwidth;
pub mod cli;
pub mod config;
pub mod contact;
pub mod fem;
pub mod geomodel;
pub mod io;
pub mod kkt;
pub mod metrics;
pub mod pressure;
pub mod scenarios;
pub mod solver;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("mesh: {0}")]
    Mesh(String),
    #[error("schedule: {0}")]
    Schedule(String),
    #[error("config parse error at line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },
    #[error("config validation: key `{key}`: {msg}")]
    ConfigValidation { key: String, msg: String },
    #[error("contact solver did not converge at step {step_label}: {msg}")]
    NonConvergence { step_label: f64, msg: String },
    #[error("linear solver: {0}")]
    LinearSolve(String),
    #[error("scenario: {0}")]
    Scenario(String),
    #[error("bandwidth input: {0}")]
    Bandwidth(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
