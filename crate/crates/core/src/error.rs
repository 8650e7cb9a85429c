use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("{0} is not a prime below 2^31")]
    NotPrime(u32),
    #[error("matrix is {rows}x{cols}, expected square")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("field mismatch: F_{0} vs F_{1}")]
    FieldMismatch(u32, u32),
    #[error("message length {len} not divisible by {by}")]
    LengthNotDivisible { len: usize, by: usize },
    #[error("share set rejected: {0}")]
    BadShareSet(String),
    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("decode failure: {0}")]
    DecodeFailure(String),
    #[error("scheme has no enumerable query index")]
    NotEnumerable,
    #[error("under-powered test: {0}")]
    UnderPowered(String),
    #[error("asymmetric query ranks: {0}")]
    AsymmetryDetected(String),
    #[error("search exhausted after {tries} tries")]
    SearchExhausted { tries: usize },
    #[error("common vector not unique for subset {0}")]
    NotUnique(String),
}
