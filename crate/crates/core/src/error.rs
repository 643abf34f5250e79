use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("an independence pair needs at least two pieces, got {0}")]
    TooFewPieces(usize),
    #[error("at most {max} pieces are supported, got {got}")]
    TooManyPieces { got: usize, max: usize },
    #[error("duplicate piece `{0}`")]
    DuplicatePiece(String),
    #[error("invalid piece name `{0}`")]
    InvalidPieceName(String),
    #[error("unknown piece `{0}`")]
    UnknownPiece(String),
    #[error("piece `{0}` cannot be independent of itself")]
    ReflexiveIndependence(String),
    #[error("dependence graph is disconnected: {0}")]
    DisconnectedDependence(String),
    #[error("heap is not a sub-heap of the given heap")]
    NotADivisor,
    #[error("missing weight for piece `{0}`")]
    MissingWeight(String),
    #[error("weight of piece `{piece}` must lie in (0,1), got {value}")]
    WeightOutOfRange { piece: String, value: f64 },
    #[error("not a Bernoulli measure: {}", .0.join("; "))]
    InvalidMeasure(Vec<String>),
    #[error("Möbius polynomial has no sign change in (0,1)")]
    NoRootInUnitInterval,
    #[error("power iteration did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("pull cap of {0} cliques exceeded")]
    PullCapExceeded(u64),
    #[error("invalid stopping-time selector `{0}`")]
    InvalidAst(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
