use std::fmt;

use thiserror::Error;

use crate::fourier::Mode;

pub type Result<T> = std::result::Result<T, Error>;

/// Pipeline stage a failure is attributed to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Sieve,
    Certify,
    Orbit,
    Monodromy,
    Continuation,
    Search,
    Assembly,
    Verification,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Config => "config",
            Stage::Sieve => "sieve",
            Stage::Certify => "certify",
            Stage::Orbit => "orbit",
            Stage::Monodromy => "monodromy",
            Stage::Continuation => "continuation",
            Stage::Search => "search",
            Stage::Assembly => "assembly",
            Stage::Verification => "verification",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("analyticity guard: |u|·δ = {norm:.6e} is not below the radius {radius:.6e}")]
    Domain { norm: f64, radius: f64 },

    #[error("support violation: mode ({}, {}) is not in {target}", .mode.0, .mode.1)]
    Support { mode: Mode, target: &'static str },

    #[error(
        "operator not certified: |symbol| = {value:.3e} at ({}, {}) is not above {threshold:.3e}",
        .mode.0, .mode.1
    )]
    Uncertified {
        mode: Mode,
        value: f64,
        threshold: f64,
    },

    #[error("sieve rejected the parameters: {0}")]
    SieveRejected(String),

    #[error(
        "range iteration diverged after {iterations} steps (rate {rate:.3}); \
         reduce |ε|/γ or the amplitude"
    )]
    Divergence { iterations: usize, rate: f64 },

    #[error("range iteration stopped after {iterations} steps with update {update:.3e}")]
    NotConverged { iterations: usize, update: f64 },

    #[error("critical-point search failed: {0}")]
    SearchFailure(String),

    #[error("continuation failed at η = {eta:.4e}: {reason}")]
    Continuation { eta: f64, reason: String },

    #[error("integrator: {0}")]
    Integrator(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("{stage} stage: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at(self, stage: Stage) -> Error {
        match self {
            Error::Stage { .. } => self,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }

    /// Innermost error with stage wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// CLI exit code: 1 usage, 2 certification or sieve, 3 solver.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Config(_) | Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
            Error::Precondition(_) => match self {
                Error::Stage {
                    stage: Stage::Config,
                    ..
                } => 1,
                _ => 2,
            },
            Error::SieveRejected(_) | Error::Uncertified { .. } | Error::Support { .. } => 2,
            Error::Domain { .. }
            | Error::Divergence { .. }
            | Error::NotConverged { .. }
            | Error::SearchFailure(_)
            | Error::Continuation { .. }
            | Error::Integrator(_) => 3,
            Error::Stage { .. } => unreachable!("root strips stage wrappers"),
        }
    }
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}
