use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid form symbol: {0}")]
    InvalidSymbol(String),
    #[error("invalid quadratic form data: {0}")]
    InvalidForm(String),
    #[error("group of order {order} exceeds the limit {limit}")]
    OrderTooLarge { order: u64, limit: u64 },
    #[error("invalid Gram matrix: {0}")]
    InvalidGram(String),
    #[error("degenerate lattice: {0}")]
    Degenerate(String),
    #[error("ambiguous identification: {0}")]
    Ambiguous(String),
    #[error("identification not justified by the uniqueness criterion: {0}")]
    Unjustified(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("class is not in the span of the basis: {0}")]
    NotInSpan(String),
    #[error("isometry check failed: {0}")]
    Isometry(String),
    #[error("kernel and orbit-sum methods disagree: {0}")]
    MethodDisagreement(String),
    #[error("invalid polynomial: {0}")]
    Polynomial(String),
    #[error("discriminant vanishes identically")]
    ZeroDiscriminant,
    #[error("non-minimal Weierstrass data at a place: {0}")]
    NonMinimal(String),
    #[error("unclassifiable vanishing orders: {0}")]
    Unclassifiable(String),
    #[error("inconsistent input: {0}")]
    Inconsistent(String),
}
