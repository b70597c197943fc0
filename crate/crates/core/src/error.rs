use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("strategy returned {0}, outcomes must be +1 or -1")]
    InvalidOutcome(i32),

    #[error("quadrature needs hidden_dim <= 2, model has {0}")]
    Dimension(usize),

    #[error("integration failure: cell ({a_index}, {b_index}) sums to {sum}")]
    IntegrationFailure {
        a_index: usize,
        b_index: usize,
        sum: f64,
    },

    #[error("correlator {0} is not in [-1, 1]")]
    CorrelatorOutOfRange(f64),

    #[error("no events for setting pairs {0:?}")]
    EmptyCells(Vec<(usize, usize)>),

    #[error("behavior is signaling (residual {0:e})")]
    Signaling(f64),

    #[error("simplex did not converge within {0} pivots")]
    SolverNonconvergence(usize),

    #[error("LP verdict ({lp_local}) disagrees with CHSH inequalities (max {max_chsh})")]
    OracleDisagreement { lp_local: bool, max_chsh: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
