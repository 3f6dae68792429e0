use thiserror::Error;

use crate::coloring::Coloring;
use crate::field::Word;
use crate::model::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("field size {0} is not a prime")]
    NotPrime(u32),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("symbol {symbol} is not an element of F_{q}")]
    SymbolOutOfRange { symbol: u32, q: u32 },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("label {value} out of range (must be < {bound})")]
    OutOfRange { value: u128, bound: u128 },

    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid instance: {}", .0.join("; "))]
    InvalidInstance(Vec<String>),
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("graph with {vertices} vertices exceeds the vertex budget of {budget}")]
    SizeLimit { vertices: u128, budget: usize },
    #[error("vertex count mismatch: {left} vs {right}")]
    VertexMismatch { left: usize, right: usize },
    #[error("confusability is only defined for distinct vectors (got {0} twice)")]
    SameVertex(usize),
    #[error("receiver {0} has a non-linear Has- or Want-function")]
    NotLinearReceiver(usize),
    #[error("instance is not a linear FICP")]
    NotLinearInstance,
    #[error("bad connection set: {0}")]
    BadConnectionSet(String),

    #[error("coloring search exhausted its budget: {lower} <= chi <= {upper}")]
    ColoringTimeout {
        lower: usize,
        upper: usize,
        best: Box<Coloring>,
    },
    #[error("independent set search exhausted its budget: {lower} <= alpha <= {upper}")]
    IndependenceTimeout {
        lower: usize,
        upper: usize,
        witness: Vec<usize>,
    },
    #[error("codebook search exhausted its budget (best has length {})", .best.first().map_or(0, |w| w.len()))]
    CodebookTimeout { best: Vec<Word> },
    #[error("work estimate {required} exceeds budget {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
    #[error("independence number is required")]
    MissingAlpha,

    #[error("coloring is improper: adjacent vertices {0} and {1} share color")]
    ImproperColoring(usize, usize),
    #[error("codeword assignment maps classes {0} and {1} to the same word")]
    AssignmentCollision(usize, usize),
    #[error("receiver {receiver} cannot tell {x} from {x_prime}: same codeword and Has-value, different Want-value")]
    Conflict {
        receiver: usize,
        x: usize,
        x_prime: usize,
    },
    #[error("no decoder entry for this (codeword, Has-value) pair")]
    UnknownKey,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unknown code {0:?}")]
    UnknownCode(String),
    #[error("generator matrix is not full rank")]
    RankDeficient,
}
