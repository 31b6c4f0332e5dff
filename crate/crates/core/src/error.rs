use std::fmt;

use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A malformed line in a trace file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: u64,
    pub reason: String,
}

impl fmt::Display for LineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("voltage unavailable for level {0}")]
    VoltageUnavailable(usize),
    #[error("invalid constant: {0}")]
    InvalidConstant(f64),
    #[error("invalid voltage: {0}")]
    InvalidVoltage(f64),
    #[error("invalid processor spec: {}", join(.0))]
    InvalidSpec(Vec<Violation>),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("infeasible: guaranteed floor exceeds budget ({floor_watts} W > {budget_watts} W)")]
    Infeasible { floor_watts: f64, budget_watts: f64 },
    #[error("infeasible: no listed level fits {budget_watts} W for {active_cores} active cores")]
    NoLookupLevel {
        active_cores: usize,
        budget_watts: f64,
    },
    #[error("oracle size guard exceeded: {combinations} assignments > {limit}")]
    OracleGuard { combinations: u128, limit: u64 },
    #[error("no table row for active-core count {0}")]
    NoTableRow(usize),
    #[error("power model has no lookup table")]
    NoLookupTable,
    #[error("invalid platform ratio {0}")]
    InvalidPlatformRatio(u32),
    #[error("no reference cycles: core idle")]
    NoReferenceCycles,
    #[error("counter decreased between samples")]
    CounterRegression,
    #[error("trace row out of range: {0}")]
    TraceRowOutOfRange(String),
    #[error("malformed trace: {}", join(.0))]
    Trace(Vec<LineError>),
    #[error("tick {tick}: {source}")]
    Tick {
        tick: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("internal invariant breached: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Infeasible { .. } | Error::NoLookupLevel { .. } => 2,
            Error::Invariant(_) => 3,
            Error::Tick { source, .. } => source.exit_code(),
            _ => 1,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        self.exit_code() == 2
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
