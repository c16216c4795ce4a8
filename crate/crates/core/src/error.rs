use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("log score of zero probability at outcome {index}")]
    ZeroProbability { index: usize },

    #[error("target price at outcome {index} is zero and unreachable by a finite trade")]
    UnreachableTarget { index: usize },

    #[error("liquidity must be positive and finite, got {0}")]
    InvalidLiquidity(f64),

    #[error("scoring rule scale must be positive, got {0}")]
    InvalidScale(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid market spec: {0}")]
    InvalidSpec(String),

    #[error("decision rule must have full support: action {action} has probability {value}")]
    FullSupport { action: usize, value: f64 },

    #[error("decision rule probability {value} for action {action} is below floor {floor}")]
    BelowFloor {
        action: usize,
        value: f64,
        floor: f64,
    },

    #[error("invalid decision rule: {0}")]
    InvalidRule(String),

    #[error("short position not permitted: trader {trader} would hold {holding} of security ({action}, {outcome})")]
    ShortPosition {
        trader: String,
        action: usize,
        outcome: usize,
        holding: f64,
    },

    #[error("transform requires short selling")]
    ShortingRequired,

    #[error("settlement before decision: no decision rule has been realized")]
    NoDecision,

    #[error("settlement payout must be positive and finite for action {action}, got {value}")]
    InvalidPayout { action: usize, value: f64 },

    #[error("trade log: {0}")]
    TradeLog(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
