use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("InvalidOrder: mollifier order q={0} must be even, >= 2 and <= {max}", max = crate::mollifier::MAX_ORDER)]
    InvalidOrder(i64),

    #[error("SingularMomentSystem: the moment constraint system could not be solved")]
    SingularMomentSystem,

    #[error("InvalidRegularization: {0}")]
    InvalidRegularization(String),

    #[error("PoleInDomain: cutoff a={a} puts the pole of 1/(r + eps*y) inside the integration range")]
    PoleInDomain { a: f64 },

    #[error("NonConvergent: |I| did not decrease over the last three schedule points (values {values:?}, fitted order {order})")]
    NonConvergent { values: Vec<f64>, order: f64 },

    #[error("DerivativeOrderExceeded: differentiating would produce a third derivative of Upsilon")]
    DerivativeOrderExceeded,

    #[error("ExpressionTooLarge: total Upsilon power {0} exceeds the engine limit of 4")]
    ExpressionTooLarge(u32),

    #[error("DivergentTail: term with r^{p} and no Upsilon derivative diverges at infinity without a cutoff")]
    DivergentTail { p: i32 },

    #[error("UnreducibleTerm: {0}")]
    UnreducibleTerm(String),

    #[error("SingularCoefficient: the moment formula is singular at n={0}")]
    SingularCoefficient(i32),

    #[error("IllConditionedFit: design matrix condition number {0:.3e} exceeds 1e10")]
    IllConditionedFit(f64),

    #[error("InsufficientSamples: {0}")]
    InsufficientSamples(String),

    #[error("NotInTable: {0}")]
    NotInTable(String),

    #[error("InfeasibleG: gyromagnetic ratio g={0} is below 3/2")]
    InfeasibleG(f64),

    #[error("RoundTripFailure: {quantity} relative deviation {deviation:.3e} exceeds {tolerance:.1e}")]
    RoundTripFailure { quantity: String, deviation: f64, tolerance: f64 },

    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
