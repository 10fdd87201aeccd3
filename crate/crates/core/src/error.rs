use thiserror::Error;

/// Errors raised by the solvers and scenario drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite integrand at t = {at}")]
    NonFiniteIntegrand { at: f64 },

    #[error("bracket invalid: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    BracketInvalid { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("mass matrix not positive (entry {index} = {value})")]
    MassNotPositive { index: usize, value: f64 },

    #[error("mass out of range: {value} not in ({lo}, {hi})")]
    MassOutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("insufficient resolution: {requested} modes requested on {intervals} intervals")]
    InsufficientResolution { requested: usize, intervals: usize },

    #[error("degenerate eigenvalue {value}")]
    DegenerateEigenvalue { value: f64 },

    #[error("budget unattainable: a = {a} is not below a+ = {a_plus}")]
    BudgetUnattainable { a: f64, a_plus: f64 },

    #[error("weight inadmissible at r = {at}: need h' > -(N-1)/r and h'' >= 0")]
    WeightInadmissible { at: f64 },

    #[error("self-consistency failure: eigenvalue {eigenvalue} vs Rayleigh quotient {rayleigh}")]
    SelfConsistency { eigenvalue: f64, rayleigh: f64 },

    #[error("profile monotonicity failed at r = {at}: {what}")]
    ProfileMonotonicity { at: f64, what: &'static str },

    #[error("incompatible supports: {0}")]
    IncompatibleSupports(String),

    #[error("sweep point a = {a} failed: {source}")]
    SweepPoint { a: f64, source: Box<Error> },

    #[error("counterexample step {step} ({name}) failed: {source}")]
    Step {
        step: u8,
        name: &'static str,
        source: Box<Error>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
