use alloc::string::String;

/// Failures of the symbolic engine. Every variant is a domain condition;
/// none of them indicates an internal inconsistency.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("denominator vanishes at the requested value of q")]
    PoleAtQ,
    #[error("operands live in different bases")]
    BasisMismatch,
    #[error("order {order} lies below the reliability floor {floor}")]
    FloorTooHigh { order: i64, floor: i64 },
    #[error("order-0 coefficient has a z^0 mode, outside the sigma=0 splitting")]
    NotInDomain,
    #[error("operator is not monic of the expected order")]
    NotMonic,
    #[error("leading coefficient is not a monomial unit")]
    NotInvertibleLeading,
    #[error("window ({n},{m}) is not invariant under structure {s}")]
    WindowNotInvariant { s: u8, n: i64, m: i64 },
    #[error("indices ({i},{j}) are outside the range of the closed formula")]
    IndexOutOfFormula { i: i64, j: i64 },
    #[error("operand has a nonzero z^{mode} mode annihilated by the constraint kernel")]
    SingularMode { mode: i64 },
    #[error("constraint kernel vanishes identically")]
    NotSecondClass,
    #[error("constraint kernel is not diagonal on z-modes after substitution")]
    NotModeDiagonal,
    #[error("bracket support escapes the mode window [-{cutoff}, {cutoff}]")]
    SupportEscapesWindow { cutoff: i64 },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = core::result::Result<T, Error>;
