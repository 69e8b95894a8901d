//! Exact arithmetic over Q(i), homogeneous polynomials in three variables,
//! elimination and numeric root finding.

pub mod cpoint;
pub mod factor;
pub mod gauss;
pub mod gcd;
pub mod hpoly;
pub mod linalg;
pub mod mpoly;
pub mod resultant;
pub mod roots;
pub mod scalar;
pub mod upoly;
pub mod zeros;

use thiserror::Error;

pub use cpoint::CPoint;
pub use gauss::GaussRat;
pub use hpoly::{CPoly, HPoly, Mono, Poly};
pub use scalar::Scalar;
pub use upoly::UPoly;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(u32, u32),
    #[error("inhomogeneous polynomial")]
    Inhomogeneous,
    #[error("variable x{0} does not occur in an operand")]
    VariableAbsent(usize),
    #[error("degenerate leading coefficient in x{0}")]
    DegenerateLeading(usize),
    #[error("root finder did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("common zero set is positive dimensional")]
    PositiveDimensional,
    #[error("common zero recovery failed: {0}")]
    Recovery(String),
    #[error("unfactorable residual of degree {0}")]
    Unfactorable(u32),
}

/// Numeric knobs shared by root finding, rationalization and seeded
/// coordinate changes.
#[derive(Clone, Debug, PartialEq)]
pub struct NumConfig {
    /// Normalized residual accepted for a root.
    pub residual: f64,
    /// Derivative threshold used to accept a root cluster as one multiple root.
    pub cluster: f64,
    pub max_iter: usize,
    /// Tolerance for recovering an exact value from a float.
    pub rational_tol: f64,
    pub max_den: u64,
    pub seed: u64,
}

impl Default for NumConfig {
    fn default() -> Self {
        NumConfig { residual: 1e-10, cluster: 1e-7, max_iter: 200, rational_tol: 1e-9, max_den: 1_000_000, seed: 0x5eed_c0de }
    }
}
