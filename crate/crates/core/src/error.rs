use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("division by a zero divisor of the coefficient ring: {0}")]
    ZeroDivisor(String),
    #[error("degenerate geometric series: ratio has tau-exponent 0")]
    DegenerateSeries,
    #[error("insufficient p-adic precision: need {needed} digits, have {have}")]
    Precision { needed: i64, have: i64 },
    #[error("enumeration budget exceeded: would enumerate {required} elements (budget {budget})")]
    Budget { required: u128, budget: u128 },
    #[error("element not in the required set: {0}")]
    NotInSet(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unsupported coefficient class: {0}")]
    Unsupported(String),
    #[error("gamma factor ill-defined (0/0) on test function {0}; choose a different test function")]
    GammaIllDefined(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
