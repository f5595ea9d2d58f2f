use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Config(String),
    #[error("weight evaluated at z = 0")]
    Domain,
    #[error("z = {z:?} is within tolerance of a weight pole")]
    Pole { z: [f64; 2] },
    #[error("precision exhausted: {0}")]
    Precision(String),
    #[error("series tail bound {bound:e} exceeds tolerance {tol:e}")]
    Convergence { bound: f64, tol: f64 },
    #[error("polynomial degree {degree} exceeds bound {bound}")]
    Degree { degree: usize, bound: usize },
    #[error("|alpha_{n}| = {modulus} is not below one")]
    SingularMeasure { n: usize, modulus: f64 },
    #[error("singular linear system")]
    SingularMatrix,
    #[error("least-squares residual {residual:e} at n = {n} exceeds {tol:e}")]
    Fit { n: usize, residual: f64, tol: f64 },
    #[error("alpha_{n} vanishes; Lax matrix undefined")]
    Degenerate { n: usize },
    #[error("12-entry has degree {0:?}, expected exactly 1")]
    Gauge(Option<usize>),
    #[error("coordinate expressions disagree: {0:e}")]
    Consistency(f64),
    #[error("point is on the indeterminacy locus: {0}")]
    Indeterminacy(String),
    #[error("gauge matrix singular: |Delta| = {0:e}")]
    SingularGauge(f64),
    #[error("parameter constraint violated by {0:e}")]
    Constraint(f64),
    #[error("chart change singular: {0}")]
    Chart(String),
    #[error("ODE singularity at t = {t:?}: {what}")]
    Singularity { t: [f64; 2], what: String },
    #[error("step size underflow at t = {0}")]
    StepFailure(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
