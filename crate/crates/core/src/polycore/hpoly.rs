use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::gauss::GaussRat;
use super::scalar::Scalar;
use super::PolyError;

/// Exponent triple (e0, e1, e2).
pub type Mono = [u32; 3];

/// Homogeneous polynomial in x0, x1, x2. Terms are kept in a map ordered so
/// that the last entry is the graded-lex leading term (x0 > x1 > x2).
#[derive(Clone, PartialEq, Debug)]
pub struct Poly<K: Scalar> {
    terms: BTreeMap<Mono, K>,
}

pub type HPoly = Poly<GaussRat>;
pub type CPoly = Poly<Complex64>;

fn mono_deg(m: &Mono) -> u32 {
    m[0] + m[1] + m[2]
}

impl<K: Scalar> Poly<K> {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn constant(c: K) -> Self {
        Self::monomial([0, 0, 0], c)
    }

    pub fn one() -> Self {
        Self::constant(K::one())
    }

    pub fn var(i: usize) -> Self {
        let mut e = [0, 0, 0];
        e[i] = 1;
        Self::monomial(e, K::one())
    }

    pub fn monomial(e: Mono, c: K) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        Poly { terms }
    }

    /// Linear form `c0*x0 + c1*x1 + c2*x2`.
    pub fn linear(c: &[K; 3]) -> Self {
        let mut p = Self::zero();
        for (i, ci) in c.iter().enumerate() {
            let mut e = [0, 0, 0];
            e[i] = 1;
            p.push_term(e, ci.clone());
        }
        p
    }

    /// Builds a polynomial from terms; duplicate exponents are summed.
    pub fn from_terms(terms: impl IntoIterator<Item = (Mono, K)>) -> Result<Self, PolyError> {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.push_term(e, c);
        }
        let mut degs = p.terms.keys().map(mono_deg);
        if let Some(d0) = degs.next() {
            if degs.any(|d| d != d0) {
                return Err(PolyError::Inhomogeneous);
            }
        }
        Ok(p)
    }

    fn push_term(&mut self, e: Mono, c: K) {
        if c.is_zero() {
            return;
        }
        let remove = match self.terms.get_mut(&e) {
            Some(v) => {
                *v = v.plus(&c);
                v.is_zero()
            }
            None => {
                self.terms.insert(e, c);
                false
            }
        };
        if remove {
            self.terms.remove(&e);
        }
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next().map(mono_deg)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == Some(0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &K)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &Mono) -> K {
        self.terms.get(e).cloned().unwrap_or_else(K::zero)
    }

    pub fn leading(&self) -> Option<(&Mono, &K)> {
        self.terms.iter().next_back()
    }

    /// Largest coefficient modulus, used to scale numeric tolerances.
    pub fn scale(&self) -> f64 {
        self.terms.values().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    /// Highest power of `x_v` dividing the polynomial.
    pub fn var_order(&self, v: usize) -> u32 {
        self.terms.keys().map(|e| e[v]).min().unwrap_or(0)
    }

    /// Degree in the single variable `x_v`.
    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|e| e[v]).max().unwrap_or(0)
    }

    pub fn uses_var(&self, v: usize) -> bool {
        self.terms.keys().any(|e| e[v] > 0)
    }

    pub fn checked_add(&self, o: &Self) -> Result<Self, PolyError> {
        match (self.degree(), o.degree()) {
            (Some(a), Some(b)) if a != b => Err(PolyError::DegreeMismatch(a, b)),
            _ => {
                let mut r = self.clone();
                for (e, c) in &o.terms {
                    r.push_term(*e, c.clone());
                }
                Ok(r)
            }
        }
    }

    pub fn checked_sub(&self, o: &Self) -> Result<Self, PolyError> {
        self.checked_add(&o.neg_ref())
    }

    fn neg_ref(&self) -> Self {
        Poly { terms: self.terms.iter().map(|(e, c)| (*e, c.negated())).collect() }
    }

    pub fn scale_by(&self, k: &K) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        Poly { terms: self.terms.iter().map(|(e, c)| (*e, c.times(k))).collect() }
    }

    pub fn mul_ref(&self, o: &Self) -> Self {
        let mut r = Self::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                r.push_term([e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]], c1.times(c2));
            }
        }
        r
    }

    pub fn mul_mono(&self, e: &Mono) -> Self {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| ([m[0] + e[0], m[1] + e[1], m[2] + e[2]], c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul_ref(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul_ref(&base);
            }
        }
        acc
    }

    pub fn partial(&self, v: usize) -> Self {
        let mut r = Self::zero();
        for (e, c) in &self.terms {
            if e[v] > 0 {
                let mut e2 = *e;
                e2[v] -= 1;
                r.push_term(e2, c.times(&K::from_i64(e[v] as i64)));
            }
        }
        r
    }

    pub fn eval(&self, x: &[K; 3]) -> K {
        let mut acc = K::zero();
        let mut cache: [Vec<K>; 3] = [vec![K::one()], vec![K::one()], vec![K::one()]];
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for v in 0..3 {
                while cache[v].len() <= e[v] as usize {
                    let nxt = cache[v].last().unwrap().times(&x[v]);
                    cache[v].push(nxt);
                }
                t = t.times(&cache[v][e[v] as usize]);
            }
            acc = acc.plus(&t);
        }
        acc
    }

    pub fn eval_c(&self, x: &[Complex64; 3]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            acc += c.to_c64() * x[0].powu(e[0]) * x[1].powu(e[1]) * x[2].powu(e[2]);
        }
        acc
    }

    /// Sum of |coefficient| * |monomial| at `x`; the natural scale of `eval_c`.
    pub fn eval_abs(&self, x: &[Complex64; 3]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c.magnitude() * x[0].norm().powi(e[0] as i32) * x[1].norm().powi(e[1] as i32) * x[2].norm().powi(e[2] as i32))
            .sum()
    }

    /// Composition `p(g0, g1, g2)`; the `g_i` should share one degree.
    pub fn substitute(&self, g: &[Poly<K>; 3]) -> Self {
        let maxe: Vec<u32> = (0..3).map(|v| self.degree_in(v)).collect();
        let pows: Vec<Vec<Poly<K>>> = (0..3)
            .map(|v| {
                let mut ps = vec![Self::one()];
                for k in 1..=maxe[v] as usize {
                    let nxt = ps[k - 1].mul_ref(&g[v]);
                    ps.push(nxt);
                }
                ps
            })
            .collect();
        let mut pair_cache: HashMap<(u32, u32), Poly<K>> = HashMap::new();
        let mut r = Self::zero();
        for (e, c) in &self.terms {
            let ab = pair_cache
                .entry((e[0], e[1]))
                .or_insert_with(|| pows[0][e[0] as usize].mul_ref(&pows[1][e[1] as usize]))
                .clone();
            let t = ab.mul_ref(&pows[2][e[2] as usize]).scale_by(c);
            for (m, cm) in t.terms {
                r.push_term(m, cm);
            }
        }
        r
    }

    /// Pullback by the linear map x -> M x, i.e. p(M x).
    pub fn linear_change(&self, m: &[[K; 3]; 3]) -> Self {
        let g = [Self::linear(&m[0]), Self::linear(&m[1]), Self::linear(&m[2])];
        self.substitute(&g)
    }

    /// Scales so that the leading coefficient is 1.
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => Self::zero(),
            Some((_, c)) => {
                let inv = K::one().over(c);
                self.scale_by(&inv)
            }
        }
    }

    pub fn to_c(&self) -> CPoly {
        Poly { terms: self.terms.iter().map(|(e, c)| (*e, c.to_c64())).collect() }
    }

    /// Division by a single divisor under the graded-lex order. Terms whose
    /// leading monomial is not divisible move to the remainder.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let (ld, lc) = match d.leading() {
            Some((e, c)) => (*e, c.clone()),
            None => panic!("division by zero polynomial"),
        };
        let scale = self.scale().max(1e-300);
        let mut p = self.clone();
        let mut q = Self::zero();
        let mut rem = Self::zero();
        while let Some((e, c)) = p.leading().map(|(e, c)| (*e, c.clone())) {
            if c.negligible(scale) {
                p.terms.remove(&e);
                continue;
            }
            if e[0] >= ld[0] && e[1] >= ld[1] && e[2] >= ld[2] {
                let qe = [e[0] - ld[0], e[1] - ld[1], e[2] - ld[2]];
                let qc = c.over(&lc);
                q.push_term(qe, qc.clone());
                for (m, cm) in &d.terms {
                    p.push_term([m[0] + qe[0], m[1] + qe[1], m[2] + qe[2]], cm.times(&qc).negated());
                }
                p.terms.remove(&e);
            } else {
                p.terms.remove(&e);
                rem.push_term(e, c);
            }
        }
        (q, rem)
    }

    /// Quotient when `d` divides `self` (exactly, or up to numeric noise).
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let (q, r) = self.div_rem(d);
        let scale = self.scale().max(1e-300);
        if r.terms.values().all(|c| c.negligible(scale)) {
            Some(q)
        } else {
            None
        }
    }

    /// Drops float coefficients below the relative threshold.
    pub fn cleaned(&self) -> Self {
        let scale = self.scale();
        Poly { terms: self.terms.iter().filter(|(_, c)| !c.negligible(scale)).map(|(e, c)| (*e, c.clone())).collect() }
    }

    /// Coefficient vector of a binary form in variables (a, b): entry k is the
    /// coefficient of x_a^(D-k) x_b^k.
    pub fn binary_coeffs(&self, a: usize, b: usize) -> Vec<K> {
        let d = self.degree().unwrap_or(0) as usize;
        let mut out = vec![K::zero(); d + 1];
        for (e, c) in &self.terms {
            debug_assert_eq!(e[3 - a - b], 0);
            out[e[b] as usize] = c.clone();
        }
        out
    }
}

impl HPoly {
    /// Parses nothing; builds from small integer terms, handy in tests.
    pub fn from_int_terms(terms: &[(Mono, i64)]) -> HPoly {
        HPoly::from_terms(terms.iter().map(|(e, c)| (*e, GaussRat::from_int(*c)))).expect("homogeneous")
    }
}

impl<K: Scalar> Add for &Poly<K> {
    type Output = Poly<K>;
    fn add(self, o: &Poly<K>) -> Poly<K> {
        self.checked_add(o).expect("degree mismatch in polynomial sum")
    }
}

impl<K: Scalar> Add for Poly<K> {
    type Output = Poly<K>;
    fn add(self, o: Poly<K>) -> Poly<K> {
        &self + &o
    }
}

impl<K: Scalar> Sub for &Poly<K> {
    type Output = Poly<K>;
    fn sub(self, o: &Poly<K>) -> Poly<K> {
        self.checked_sub(o).expect("degree mismatch in polynomial difference")
    }
}

impl<K: Scalar> Sub for Poly<K> {
    type Output = Poly<K>;
    fn sub(self, o: Poly<K>) -> Poly<K> {
        &self - &o
    }
}

impl<K: Scalar> Mul for &Poly<K> {
    type Output = Poly<K>;
    fn mul(self, o: &Poly<K>) -> Poly<K> {
        self.mul_ref(o)
    }
}

impl<K: Scalar> Mul for Poly<K> {
    type Output = Poly<K>;
    fn mul(self, o: Poly<K>) -> Poly<K> {
        self.mul_ref(&o)
    }
}

impl<K: Scalar> Neg for &Poly<K> {
    type Output = Poly<K>;
    fn neg(self) -> Poly<K> {
        self.neg_ref()
    }
}

impl<K: Scalar> Neg for Poly<K> {
    type Output = Poly<K>;
    fn neg(self) -> Poly<K> {
        self.neg_ref()
    }
}

fn write_mono(f: &mut fmt::Formatter<'_>, e: &Mono) -> fmt::Result {
    let mut first = true;
    for v in 0..3 {
        if e[v] == 0 {
            continue;
        }
        if !first {
            write!(f, "*")?;
        }
        first = false;
        if e[v] == 1 {
            write!(f, "x{}", v)?;
        } else {
            write!(f, "x{}^{}", v, e[v])?;
        }
    }
    Ok(())
}

impl fmt::Display for Poly<GaussRat> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let is_const = mono_deg(e) == 0;
            let (neg, mag) = if c.is_real() && c.re < num_rational::BigRational::from_integer(0.into()) {
                (true, -c)
            } else {
                (false, c.clone())
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            if is_const {
                write!(f, "{}", mag)?;
            } else if mag.is_one() {
                write_mono(f, e)?;
            } else {
                write!(f, "{}*", mag)?;
                write_mono(f, e)?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Poly<Complex64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}*i)", c.re, c.im)?;
            if mono_deg(e) > 0 {
                write!(f, "*")?;
                write_mono(f, e)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> HPoly {
        HPoly::var(i)
    }

    #[test]
    fn products_and_sums() {
        let p = &x(0) * &x(1);
        assert_eq!(p.degree(), Some(2));
        let a = &x(0) + &x(1);
        let b = &x(0) - &x(1);
        assert_eq!(&a * &b, &(&x(0) * &x(0)) - &(&x(1) * &x(1)));
        let two = HPoly::constant(GaussRat::from_int(2));
        assert_eq!(&a + &b, &two * &x(0));
        assert!(x(0).checked_add(&p).is_err());
    }

    #[test]
    fn partials_and_euler() {
        let p = &(&x(0) * &x(1)) * &x(2);
        let mut euler = HPoly::zero();
        for v in 0..3 {
            euler = &euler + &(&x(v) * &p.partial(v));
        }
        assert_eq!(euler, p.scale_by(&GaussRat::from_int(3)));
        assert_eq!((&x(0) * &x(0)).partial(0), x(0).scale_by(&GaussRat::from_int(2)));
        assert_eq!((&x(1) * &x(2)).partial(2), x(1));
    }

    #[test]
    fn exact_division() {
        let a = &x(0) + &x(1);
        let b = &(&x(0) * &x(2)) - &(&x(1) * &x(1));
        let p = &a * &b;
        assert_eq!(p.div_exact(&a), Some(b.clone()));
        assert_eq!(p.div_exact(&x(2)), None);
    }

    #[test]
    fn substitution_composes() {
        let sigma = [&x(1) * &x(2), &x(0) * &x(2), &x(0) * &x(1)];
        let p = &x(0) * &x(1);
        let q = p.substitute(&sigma);
        assert_eq!(q, &(&(&x(0) * &x(1)) * &x(2)) * &x(2));
    }

    #[test]
    fn display_round_shape() {
        let p = &(&x(0) * &x(0)) - &(&x(1) * &x(2)).scale_by(&GaussRat::from_int(3));
        assert_eq!(p.to_string(), "x0^2 - 3*x1*x2");
    }
}
