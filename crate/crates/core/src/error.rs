use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed scalar literal `{0}`")]
    MalformedScalar(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("invalid dimensions: n = {n}, m = {m} (both must be at least 1)")]
    InvalidDimensions { n: usize, m: usize },
    #[error("jet order {needed} exceeds the context maximum {max}")]
    JetOrderOverflow { needed: usize, max: usize },
    #[error("cannot compose a truncated series with a substitution that has a constant term")]
    SeriesComposition,
    #[error("Jacobian of the implicit system is singular at the base point")]
    SingularJacobian,
    #[error("implicit system does not vanish at the base point (equation {0})")]
    InconsistentBase(usize),
    #[error("implicit series failed back-substitution at degree {0}")]
    ImplicitSolveFailed(u32),
    #[error("inconsistent linear system at row {row}")]
    Inconsistent { row: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("function mentions jet variables of order {found}, at most {allowed} allowed here")]
    JetVariablesNotAllowed { found: usize, allowed: usize },
    #[error("second-order subsystem is singular (unresolved unknown {unknown}; rows considered: {rows})")]
    SingularSubsystem { unknown: String, rows: usize },
    #[error("Taylor recursion inconsistent at layer {layer}: {detail}")]
    RecursionInconsistent { layer: u32, detail: String },
    #[error("Taylor recursion leaves layer {layer} underdetermined ({free} free unknowns)")]
    RecursionUnderdetermined { layer: u32, free: usize },
    #[error("truncation order {got} of the system is too small; order {needed} is needed")]
    TruncationTooSmall { needed: u32, got: u32 },
    #[error("initial data has length {got}, expected {expected}")]
    InitialDataLength { expected: usize, got: usize },
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("polynomial division inapplicable: {0}")]
    DivisionInapplicable(String),
    #[error("defining polynomial is not real (differs from its conjugate)")]
    NotReal,
    #[error("invalid defining series: {0}")]
    InvalidDefiningSeries(String),
    #[error("invalid PDE system: {0}")]
    InvalidSystem(String),
    #[error("basis fields are linearly dependent (rank {rank} < {count})")]
    DependentBasis { rank: usize, count: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
