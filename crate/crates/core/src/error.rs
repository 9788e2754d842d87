use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{q} is not a power of the prime {p}")]
    NotPrimePower { q: u64, p: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degree {from} does not divide degree {to}")]
    DegreeNotDivisible { from: u32, to: u32 },

    #[error("operands belong to different structures: {0}")]
    StructureMismatch(String),

    #[error("polygon units differ: {0} vs {1}")]
    UnitMismatch(String, String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("place is not rational over the base field: {0}")]
    NonRationalPlace(String),

    #[error("character is not totally ramified: {0}")]
    NotTotallyRamified(String),

    #[error("ramification invariant violated: {0}")]
    Ramification(String),

    #[error("infeasible computation: {what} (estimated {cost} evaluations, limit {limit})")]
    Infeasible { what: String, cost: u128, limit: u128 },

    #[error("place {0} is not in the ramified set")]
    NotRamified(String),

    #[error("integrality check failed: {0}")]
    Integrality(String),

    #[error("degree check failed: {0}")]
    Degree(String),

    #[error("point count mismatch: {0}")]
    PointCount(String),

    #[error("polygon bound violated: {0}")]
    BoundViolation(String),

    #[error("stabilization failed: {0}")]
    Stabilization(String),

    #[error("precision exhausted: {0}")]
    Precision(String),

    #[error("matrix shapes differ: {0}x{0} vs {1}x{1}")]
    ShapeMismatch(usize, usize),

    #[error("unsupported: {0}")]
    Unsupported(String),
}
