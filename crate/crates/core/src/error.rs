use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("element is not hyperbolic (|trace| = {trace})")]
    NotHyperbolic { trace: f64 },

    #[error("enumeration produced a non-hyperbolic element (|trace| = {trace}, word {word:?}); generators do not define a surface group")]
    NonHyperbolicElementFound { trace: f64, word: Vec<i32> },

    #[error("estimated {estimate:.3e} group elements exceeds budget {budget:.3e}")]
    CutoffTooExpensive { estimate: f64, budget: f64 },

    #[error("spectrum is empty")]
    EmptySpectrum,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),

    #[error("direction entry refers to spectrum index {index}, spectrum has {len} entries")]
    Index { index: usize, len: usize },

    #[error("non-positive length {length} at stencil point")]
    NonPositiveLength { length: f64 },

    #[error("pole of the Barnes function at s = {0}")]
    Pole(String),

    #[error("argument {value} within guard band {band:e} of excluded point {point}")]
    GuardBand { value: f64, point: f64, band: f64 },

    #[error("quadrature failed to reach tolerance (estimated error {estimate:e})")]
    QuadratureFailure { estimate: f64 },

    #[error("direction basis ill-conditioned (Gram condition number {cond:e})")]
    IllConditionedBasis { cond: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("validation error: {0}")]
    Validation(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
