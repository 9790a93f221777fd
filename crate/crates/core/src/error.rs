use thiserror::Error;

/// Errors produced by the fusion samplers and their building blocks.
#[derive(Debug, Error)]
pub enum FusionError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite {quantity} for factor {factor} at x = {x:?}")]
    NumericDomain {
        factor: usize,
        quantity: &'static str,
        x: Vec<f64>,
    },

    #[error(
        "crossing-probability series did not separate the decision variable within {cap} \
         refinements (piece {start} -> {end} over time {duration}, bounds [{lower}, {upper}])"
    )]
    SeriesCap {
        cap: usize,
        start: f64,
        end: f64,
        duration: f64,
        lower: f64,
        upper: f64,
    },

    #[error("rejection loop exceeded {cap} proposals while {context}")]
    ProposalCap { cap: u64, context: &'static str },

    #[error(
        "surrogate inconsistent at T = {horizon}: D[{coord}] = {value} must be finite and positive"
    )]
    SurrogateInconsistent {
        horizon: f64,
        coord: usize,
        value: f64,
    },

    #[error(
        "M1 for factor {factor}, coordinate {coord} is numerically singular \
         (value {value:e}, scale {scale:e})"
    )]
    SingularM1 {
        factor: usize,
        coord: usize,
        value: f64,
        scale: f64,
    },

    #[error(
        "factor {factor} has no finite lower bound for phi_dl - phi_ou under the supplied \
         surrogate; the Ornstein-Uhlenbeck sampler needs a target with lighter-than-Gaussian \
         tails, use the Brownian-bridge sampler (fuse_bm) instead"
    )]
    MissingOuBound { factor: usize },

    #[error("degenerate factor: {0}")]
    DegenerateFactor(String),

    #[error("internal consistency violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, FusionError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(FusionError::InvalidArgument(msg.into()))
}
