use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid mean {value} for {model} observations")]
    InvalidMean { model: &'static str, value: f64 },

    #[error("parameter vector must have at least 2 arms, got {0}")]
    TooFewArms(usize),

    #[error("parameter vector has {got} entries but the structure has {expected} arms")]
    ArmCountMismatch { expected: usize, got: usize },

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("no Condorcet winner in the preference matrix")]
    NoCondorcetWinner,

    #[error("weighted features do not span the feature space (rank {rank} < {dim})")]
    RankDeficient { rank: usize, dim: usize },

    #[error("linear program is infeasible")]
    LpInfeasible,

    #[error("linear program is unbounded")]
    LpUnbounded,

    #[error("unsupported observation model for this structure: {0}")]
    UnsupportedModel(String),

    #[error("instance generator gave up after {attempts} attempts: {reason}")]
    GeneratorExhausted { attempts: usize, reason: String },

    #[error("invalid policy configuration: {0}")]
    InvalidPolicy(String),

    #[error("round {round}: {source}")]
    AtRound {
        round: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
