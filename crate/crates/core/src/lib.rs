//! Length spectra of compact hyperbolic surfaces and the Selberg, Ruelle and
//! higher zeta functions built on them, together with their first and second
//! variations along Teichmuller directions.
//!
//! Every series is evaluated over an explicit [`spectrum::LengthSpectrum`], so
//! results are exact functions of the supplied lengths up to reported
//! truncation bounds.

pub mod curvature;
pub mod determinant;
pub mod error;
pub mod moebius;
pub mod spectrum;
pub mod summation;
pub mod variation;
pub mod zeta;

pub use error::{Error, Result};
pub use num_complex::Complex64;
