use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("gamma index {0} out of range 0..=3")]
    GammaIndex(usize),

    #[error("null momentum u must be nonzero")]
    ZeroNullMomentum,

    #[error("null momentum u = {0} must be negative for projector kernels")]
    NonNegativeNullMomentum(f64),

    #[error("mass must be positive, got {0}")]
    NonPositiveMass(f64),

    #[error("s = {s} outside the tabulated range [{lo}, {hi}]")]
    OutOfDomain { s: f64, lo: f64, hi: f64 },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("spinor is not in the range of the Pi- projector (defect {0:e})")]
    NotInPiMinusRange(f64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("mass weight is not smooth and compactly supported: {0}")]
    NonSmoothMassWeight(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("magnitude at x = {0} is not positive")]
    NonPositiveMagnitude(f64),

    #[error("undersampled grid: Nyquist frequency {nyquist} below required {required}")]
    Undersampled { nyquist: f64, required: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge on [{a}, {b}] (error estimate {estimate:e})")]
    QuadratureFailed { a: f64, b: f64, estimate: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors that come from the numerical domain of an operation
    /// (as opposed to malformed input documents).
    pub fn is_domain(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Csv(_) | Error::Json(_))
    }
}
