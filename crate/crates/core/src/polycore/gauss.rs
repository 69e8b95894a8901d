use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact Gaussian rational `re + im*i`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn zero() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        GaussRat::from_int(1)
    }

    pub fn i() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        GaussRat::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    pub fn from_frac(n: i64, d: i64) -> Self {
        GaussRat::new(
            BigRational::new(BigInt::from(n), BigInt::from(d)),
            BigRational::zero(),
        )
    }

    pub fn from_rational(r: BigRational) -> Self {
        GaussRat::new(r, BigRational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat::new(self.re.clone(), -self.im.clone())
    }

    /// `re^2 + im^2`.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Self {
        assert!(!self.is_zero(), "inverse of zero");
        let n = self.norm_sqr();
        GaussRat::new(&self.re / &n, -(&self.im / &n))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = GaussRat::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }

    /// Rough size used for scaling numeric tolerances.
    pub fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }

    /// Total bit size of numerators and denominators.
    pub fn height(&self) -> u64 {
        self.re.numer().bits() + self.re.denom().bits() + self.im.numer().bits() + self.im.denom().bits()
    }

    /// Continued-fraction recovery of an exact value from a float.
    pub fn rationalize(z: Complex64, tol: f64, max_den: u64) -> Option<GaussRat> {
        let re = rationalize_f64(z.re, tol, max_den)?;
        let im = rationalize_f64(z.im, tol, max_den)?;
        Some(GaussRat::new(re, im))
    }
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000) as usize;
    let n2: BigInt = n >> shift;
    let d2: BigInt = d >> shift;
    n2.to_f64().unwrap_or(0.0) / d2.to_f64().unwrap_or(1.0)
}

/// Best rational approximation with denominator at most `max_den`, accepted
/// only when it lies within `tol` (absolute, scaled by max(1,|x|)).
pub fn rationalize_f64(x: f64, tol: f64, max_den: u64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let scale = x.abs().max(1.0);
    if x.abs() <= tol {
        return Some(BigRational::zero());
    }
    let (mut h0, mut h1): (i128, i128) = (0, 1);
    let (mut k0, mut k1): (i128, i128) = (1, 0);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let approx = h1 as f64 / k1 as f64;
        if (approx - x).abs() <= tol * scale {
            return Some(BigRational::new(BigInt::from(h1), BigInt::from(k1)));
        }
        let frac = v - a;
        if frac.abs() < 1e-300 {
            break;
        }
        v = 1.0 / frac;
    }
    if k1 != 0 && ((h1 as f64 / k1 as f64) - x).abs() <= tol * scale {
        return Some(BigRational::new(BigInt::from(h1), BigInt::from(k1)));
    }
    None
}

/// Exact square root inside Q(i) when it exists.
pub fn sqrt_exact(z: &GaussRat) -> Option<GaussRat> {
    if z.is_zero() {
        return Some(GaussRat::zero());
    }
    let c = z.to_c64().sqrt();
    for tol in [1e-12, 1e-9] {
        if let Some(r) = GaussRat::rationalize(c, tol, 1 << 40) {
            if &(&r * &r) == z {
                return Some(r);
            }
        }
    }
    if z.is_real() && !z.re.is_negative() {
        let n = z.re.numer();
        let d = z.re.denom();
        let sn = n.sqrt();
        let sd = d.sqrt();
        if &(&sn * &sn) == n && &(&sd * &sd) == d {
            return Some(GaussRat::from_rational(BigRational::new(sn, sd)));
        }
    }
    None
}

fn fmt_rat(r: &BigRational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRat {
    /// Prints in the expression grammar, parenthesized when it is a sum.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", fmt_rat(&self.re));
        }
        let im_abs = self.im.abs();
        let im_part = if im_abs.is_one() {
            "i".to_string()
        } else {
            format!("{}*i", fmt_rat(&im_abs))
        };
        if self.re.is_zero() {
            if self.im.is_negative() {
                write!(f, "-{}", im_part)
            } else {
                write!(f, "{}", im_part)
            }
        } else {
            let sign = if self.im.is_negative() { "-" } else { "+" };
            write!(f, "({}{}{})", fmt_rat(&self.re), sign, im_part)
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<'a> $tr<&'a GaussRat> for &'a GaussRat {
            type Output = GaussRat;
            fn $m(self, o: &'a GaussRat) -> GaussRat {
                let f: fn(&GaussRat, &GaussRat) -> GaussRat = $body;
                f(self, o)
            }
        }
        impl $tr<GaussRat> for GaussRat {
            type Output = GaussRat;
            fn $m(self, o: GaussRat) -> GaussRat {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a GaussRat> for GaussRat {
            type Output = GaussRat;
            fn $m(self, o: &'a GaussRat) -> GaussRat {
                (&self).$m(o)
            }
        }
    };
}

binop!(Add, add, |a, b| GaussRat::new(&a.re + &b.re, &a.im + &b.im));
binop!(Sub, sub, |a, b| GaussRat::new(&a.re - &b.re, &a.im - &b.im));
binop!(Mul, mul, |a, b| {
    if a.im.is_zero() && b.im.is_zero() {
        return GaussRat::new(&a.re * &b.re, BigRational::zero());
    }
    GaussRat::new(&a.re * &b.re - &a.im * &b.im, &a.re * &b.im + &a.im * &b.re)
});
binop!(Div, div, |a, b| {
    if b.im.is_zero() {
        assert!(!b.re.is_zero(), "division by zero");
        return GaussRat::new(&a.re / &b.re, &a.im / &b.re);
    }
    a * &b.inv()
});

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-self.re, -self.im)
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-self.re.clone(), -self.im.clone())
    }
}

impl From<i64> for GaussRat {
    fn from(n: i64) -> Self {
        GaussRat::from_int(n)
    }
}

/// Lcm of all denominators appearing in a list of coefficients.
pub fn lcm_denominators<'a>(vals: impl Iterator<Item = &'a GaussRat>) -> BigInt {
    let mut l = BigInt::one();
    for v in vals {
        l = l.lcm(v.re.denom());
        l = l.lcm(v.im.denom());
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_in_q_i() {
        let a = GaussRat::new(BigRational::from_integer(1.into()), BigRational::from_integer(2.into()));
        let b = GaussRat::from_frac(3, 4);
        let p = &a * &b;
        assert_eq!(p, GaussRat::new(BigRational::new(3.into(), 4.into()), BigRational::new(3.into(), 2.into())));
        assert_eq!(&(&p / &b), &a);
        assert_eq!(&(&a * &a.inv()), &GaussRat::one());
        assert_eq!(GaussRat::i().pow(2), GaussRat::from_int(-1));
    }

    #[test]
    fn rationalize_recovers_small_fractions() {
        let z = Complex64::new(-3.0 / 7.0, 5.0 / 11.0);
        let r = GaussRat::rationalize(z, 1e-12, 1_000_000).unwrap();
        assert_eq!(r.re, BigRational::new((-3).into(), 7.into()));
        assert_eq!(r.im, BigRational::new(5.into(), 11.into()));
        assert!(GaussRat::rationalize(Complex64::new(2f64.sqrt(), 0.0), 1e-13, 1000).is_none());
    }

    #[test]
    fn exact_square_roots() {
        let z = GaussRat::from_frac(9, 4);
        assert_eq!(sqrt_exact(&z), Some(GaussRat::from_frac(3, 2)));
        let w = &(GaussRat::from_int(1) + GaussRat::i()) * &(GaussRat::from_int(1) + GaussRat::i());
        let s = sqrt_exact(&w).unwrap();
        assert_eq!(&s * &s, w);
        assert!(sqrt_exact(&GaussRat::from_int(2)).is_none());
    }

    #[test]
    fn display_grammar() {
        assert_eq!(GaussRat::from_frac(-3, 2).to_string(), "-3/2");
        assert_eq!(GaussRat::i().to_string(), "i");
        let z = GaussRat::from_int(1) - GaussRat::i();
        assert_eq!(z.to_string(), "(1-i)");
    }
}
