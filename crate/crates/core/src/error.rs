use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("matrix is not Hermitian (deviation {deviation:.3e} exceeds {tol:.3e})")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("dimension must be a positive even integer, got {0}")]
    OddDimension(usize),

    #[error("the six super-operator maps are degenerate at this dimension: {0}")]
    BasisDegeneracy(String),

    #[error("expansion coefficient {value} is {distance:.3e} from the nearest integer")]
    NonIntegerCoefficient { value: f64, distance: f64 },

    #[error("polynomial oracle inconsistency: {0}")]
    PolynomialOracle(String),

    #[error("lattice too small: {0}")]
    LatticeTooSmall(String),

    #[error("CFL condition violated: dt = {dt} > dx = {dx}")]
    CflViolation { dt: f64, dx: f64 },

    #[error("incommensurate wavenumber: {0}")]
    IncommensurateMode(String),

    #[error("no analytic derivative data: {0}")]
    NoAnalyticDerivatives(String),

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
