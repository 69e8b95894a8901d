use std::fmt::Debug;

use num_complex::Complex64;

use super::gauss::GaussRat;

/// Relative threshold under which a float coefficient counts as zero.
pub const NUMERIC_ZERO: f64 = 1e-9;

/// Field operations shared by exact and floating coefficients, so that
/// restriction and rank tests run unchanged on both.
pub trait Scalar: Clone + PartialEq + Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn from_gauss(g: &GaussRat) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn over(&self, o: &Self) -> Self;
    fn negated(&self) -> Self;
    /// Exact zero test.
    fn is_zero(&self) -> bool;
    /// Zero relative to `scale`: exact for GaussRat, thresholded for floats.
    fn negligible(&self, scale: f64) -> bool;
    fn to_c64(&self) -> Complex64;
    fn magnitude(&self) -> f64;
    const EXACT: bool;
}

impl Scalar for GaussRat {
    fn zero() -> Self {
        GaussRat::zero()
    }
    fn one() -> Self {
        GaussRat::one()
    }
    fn from_i64(n: i64) -> Self {
        GaussRat::from_int(n)
    }
    fn from_gauss(g: &GaussRat) -> Self {
        g.clone()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn over(&self, o: &Self) -> Self {
        self / o
    }
    fn negated(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        GaussRat::is_zero(self)
    }
    fn negligible(&self, _scale: f64) -> bool {
        GaussRat::is_zero(self)
    }
    fn to_c64(&self) -> Complex64 {
        GaussRat::to_c64(self)
    }
    fn magnitude(&self) -> f64 {
        GaussRat::magnitude(self)
    }
    const EXACT: bool = true;
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn from_gauss(g: &GaussRat) -> Self {
        g.to_c64()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn over(&self, o: &Self) -> Self {
        self / o
    }
    fn negated(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn negligible(&self, scale: f64) -> bool {
        self.norm() <= NUMERIC_ZERO * scale.max(f64::MIN_POSITIVE)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    const EXACT: bool = false;
}
