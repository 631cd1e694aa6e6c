use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("width {0} out of range (1..=64)")]
    WidthOutOfRange(usize),

    #[error("value {value:#x} does not fit in {width} bits")]
    ValueTooWide { value: u64, width: usize },

    #[error("width mismatch: expected {expected} bits, got {found}")]
    WidthMismatch { expected: usize, found: usize },

    #[error("matrix must have {expected} rows, got {found}")]
    RowCount { expected: usize, found: usize },

    #[error("generation matrix is rank deficient: rank {rank} < {m}")]
    RankDeficient { rank: usize, m: usize },

    #[error("gray words differ in {weight} bits, expected exactly one")]
    NonAdjacentGray { weight: u32 },

    #[error("count {count} exceeds sequence length 2^{m}")]
    CountTooLarge { count: u128, m: usize },

    #[error("shift {shift} out of range for width {m}")]
    ShiftOutOfRange { shift: u128, m: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("sequence is not complete ({0}); balance properties need a complete sequence")]
    IncompleteSequence(String),
}
