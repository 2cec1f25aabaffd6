use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the domain of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A user-supplied bound set violates the box ordering rules.
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    #[error("feasible set is empty: {0}")]
    EmptyFeasibleSet(String),

    /// The candidate set came back empty even though a grid probe found
    /// feasible points. Indicates a gap in the candidate families.
    #[error("no candidate survived although the feasible set is nonempty")]
    CandidateSetExhausted,

    #[error("design matrix is rank deficient: {0}")]
    RankDeficient(String),

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("tuple is not realizable: {0}")]
    NotRealizable(String),

    #[error("prior is incompatible with the feasible set: acceptance rate {rate:.2e} over {draws} draws")]
    PriorIncompatible { rate: f64, draws: usize },

    #[error("grid contains no feasible node")]
    EmptyGrid,
}

pub type Result<T> = std::result::Result<T, Error>;
