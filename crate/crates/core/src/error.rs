use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("variable `{0}` is not declared")]
    UndeclaredVariable(String),

    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),

    #[error("index {index} out of range for `{name}`")]
    IndexOutOfRange { name: String, index: usize },

    #[error("malformed parity usage: {0}")]
    MalformedParity(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("diagram {diagram} is outside the stable range of so({d})")]
    OutOfStableRange { diagram: String, d: usize },

    #[error("character is not invariant under the Weyl group")]
    NotWeylInvariant,

    #[error("operands live over different groups (so({0}) vs so({1}))")]
    GroupMismatch(usize, usize),

    #[error("series constant term is not the unit")]
    NonUnitConstantTerm,

    #[error("series constant term must vanish")]
    NonZeroConstantTerm,

    #[error("non-integral coefficient at (m, n) = ({m}, {n})")]
    NonIntegralResult { m: u32, n: u32 },

    #[error("brute-force problem too large: {0}")]
    BruteForceTooLarge(String),

    #[error("stage {0} is not supported (1..=3)")]
    UnsupportedStage(u32),

    #[error("slice too large: {size} > {bound}")]
    SliceTooLarge { size: usize, bound: usize },

    #[error("d^2 does not vanish on `{generator}`: {residue}")]
    NilpotenceFailure { generator: String, residue: String },

    #[error("derivative order {order} exceeds the jet bound {bound}")]
    DerivativeOrderOverflow { order: u32, bound: u32 },

    #[error("incomplete algebra spec: {0}")]
    IncompleteSpec(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
