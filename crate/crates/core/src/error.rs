use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invalid module: {0}")]
    InvalidModule(String),
    #[error("invalid ring: {0}")]
    InvalidRing(String),
    #[error("denominator lattice is not contained in the numerator lattice")]
    Containment,
    #[error("u[{0}][{1}] is not in the kernel of the norm map")]
    NotInKernel(usize, usize),
    #[error("unsupported case: {0}")]
    UnsupportedCase(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("orbit budget exceeded: {0}")]
    OrbitBudget(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("zero element has no leading term")]
    ZeroElement,
    #[error("division by zero")]
    DivisionByZero,
    #[error("divisors differ")]
    DivisorMismatch,
    #[error("not a lambda-polynomial for the given lambda")]
    NotLambdaPoly,
    #[error("starting point is not a simple root of the homogenized polynomial")]
    NotSimpleRoot,
    #[error("homogenized factors are not coprime")]
    NotCoprime,
    #[error("extension step is not tame: {0}")]
    NotTame(String),
    #[error("splitting base condition fails: {0}")]
    SplittingBase(String),
}

impl Error {
    /// Process exit status for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UnsupportedCase(_) => 2,
            Error::BudgetExceeded(_) | Error::OrbitBudget(_) | Error::PrecisionExhausted(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
