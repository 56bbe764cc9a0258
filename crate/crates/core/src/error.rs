use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid p-adic context: {0}")]
    BadContext(String),
    #[error("operands live in different p-adic contexts")]
    ContextMismatch,
    #[error("operands live on different groups")]
    GroupMismatch,
    #[error("element is not a unit")]
    NotAUnit,
    #[error("precision exhausted: every pivot candidate in column {column} vanishes mod p^N")]
    PrecisionExhausted { column: usize },
    #[error("invalid group: {0}")]
    BadGroup(String),
    #[error("invalid homomorphism: {0}")]
    BadHom(String),
    #[error("homomorphism is not surjective")]
    NotSurjective,
    #[error("|Delta| = {order} is divisible by p = {p}")]
    BadDelta { order: u64, p: u64 },
    #[error("group order {order} is not prime to p = {p}")]
    OrderNotCoprime { order: u64, p: u64 },
    #[error("character values do not lie in Z_p: {0}")]
    CharacterValueNotInBaseField(String),
    #[error("missing entry at modulus index ({a},{b})")]
    MissingEntry { a: u32, b: u32 },
    #[error("norm conditions at ({a},{b}) are inconsistent")]
    InfeasibleConstraints { a: u32, b: u32 },
    #[error("symbol table is missing the class of {0}")]
    IncompleteTable(u64),
    #[error("quotient ring is not of a supported form: {0}")]
    UnsupportedQuotient(String),
    #[error("ideals live in different rings")]
    RingMismatch,
    #[error("both elements vanish, ratio is indeterminate")]
    IndeterminateWhenBothZero,
    #[error("invalid Hecke data: {0}")]
    BadHecke(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("I/O error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Invalid(e.to_string())
    }
}
