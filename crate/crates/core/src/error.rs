use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QplError {
    #[error("factor count mismatch: {0} vs {1}")]
    FactorMismatch(usize, usize),
    #[error("constant term is not a unit: {0}")]
    NonUnit(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("z-window exhausted: exponent {exponent} outside known window [{lo}, {hi}]")]
    WindowExhausted { exponent: i32, lo: i32, hi: i32 },
    #[error("not divisible by x+y: diagonal coefficient at total degree {degree} is {detail}")]
    DiagonalNonvanishing { degree: u32, detail: String },
    #[error("unstable moduli (g={g}, n={n})")]
    Unstable { g: u32, n: usize },
    #[error("outside supported range: {0}")]
    OutOfRange(String),
    #[error("singular elimination step: {0}")]
    Singular(String),
    #[error("outside Hodge table range: {0}")]
    TableRange(String),
    #[error("insufficient depth: {0}")]
    Depth(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, QplError>;
