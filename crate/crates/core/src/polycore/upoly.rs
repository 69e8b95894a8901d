use num_complex::Complex64;

use super::gauss::GaussRat;
use super::scalar::Scalar;

/// Dense univariate polynomial, coefficients from low to high degree.
#[derive(Clone, PartialEq, Debug)]
pub struct UPoly<K: Scalar> {
    c: Vec<K>,
}

impl<K: Scalar> UPoly<K> {
    pub fn new(mut c: Vec<K>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        UPoly { c }
    }

    pub fn zero() -> Self {
        UPoly { c: Vec::new() }
    }

    pub fn constant(k: K) -> Self {
        Self::new(vec![k])
    }

    pub fn one() -> Self {
        Self::constant(K::one())
    }

    /// The polynomial `t`.
    pub fn t() -> Self {
        Self::new(vec![K::zero(), K::one()])
    }

    pub fn coeffs(&self) -> &[K] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> K {
        self.c.get(k).cloned().unwrap_or_else(K::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.c.len() - 1)
        }
    }

    pub fn lead(&self) -> K {
        self.c.last().cloned().unwrap_or_else(K::zero)
    }

    pub fn eval(&self, x: &K) -> K {
        let mut acc = K::zero();
        for a in self.c.iter().rev() {
            acc = acc.times(x).plus(a);
        }
        acc
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        Self::new((0..n).map(|k| self.coeff(k).plus(&o.coeff(k))).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        Self::new((0..n).map(|k| self.coeff(k).minus(&o.coeff(k))).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![K::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                out[i + j] = out[i + j].plus(&a.times(b));
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, k: &K) -> Self {
        Self::new(self.c.iter().map(|a| a.times(k)).collect())
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(self.c.iter().enumerate().skip(1).map(|(k, a)| a.times(&K::from_i64(k as i64))).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let inv = K::one().over(&self.lead());
        self.scale(&inv)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by zero polynomial");
        let lc = d.lead();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut q = vec![K::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let coef = r[k + dd].over(&lc);
            if !coef.is_zero() {
                for (j, dj) in d.c.iter().enumerate() {
                    r[k + j] = r[k + j].minus(&coef.times(dj));
                }
            }
            r[k + dd] = K::zero();
            q[k] = coef;
        }
        r.truncate(dd);
        (Self::new(q), Self::new(r))
    }

    /// Composition `self(g(t))`.
    pub fn compose(&self, g: &Self) -> Self {
        let mut acc = Self::zero();
        for a in self.c.iter().rev() {
            acc = acc.mul(g).add(&Self::constant(a.clone()));
        }
        acc
    }

    pub fn to_c(&self) -> UPoly<Complex64> {
        UPoly::new(self.c.iter().map(|a| a.to_c64()).collect())
    }

    /// Lagrange-free interpolation through (t_j, v_j) by Newton differences.
    pub fn interpolate(ts: &[K], vs: &[K]) -> Self {
        let n = ts.len();
        let mut dd: Vec<K> = vs.to_vec();
        for j in 1..n {
            for i in (j..n).rev() {
                let num = dd[i].minus(&dd[i - 1]);
                let den = ts[i].minus(&ts[i - j]);
                dd[i] = num.over(&den);
            }
        }
        let mut acc = Self::zero();
        for i in (0..n).rev() {
            let lin = Self::new(vec![ts[i].negated(), K::one()]);
            acc = acc.mul(&lin).add(&Self::constant(dd[i].clone()));
        }
        acc
    }
}

impl UPoly<GaussRat> {
    /// Monic gcd over Q(i); gcd(0, 0) = 0.
    pub fn gcd(&self, o: &Self) -> Self {
        let mut a = self.monic();
        let mut b = o.monic();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let (q, r) = self.div_rem(d);
        if r.is_zero() {
            Some(q)
        } else {
            None
        }
    }

    /// Yun decomposition: list of (squarefree factor, multiplicity) with
    /// nonconstant factors only.
    pub fn squarefree(&self) -> Vec<(Self, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let fp = f.derivative();
        let a0 = f.gcd(&fp);
        let mut b = f.div_exact(&a0).unwrap();
        let mut c = fp.div_exact(&a0).unwrap();
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        while b.degree().unwrap_or(0) > 0 {
            let a = b.gcd(&d);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.clone(), i));
            }
            b = b.div_exact(&a).unwrap();
            c = d.div_exact(&a).unwrap();
            d = c.sub(&b.derivative());
            i += 1;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn up(v: &[i64]) -> UPoly<GaussRat> {
        UPoly::new(v.iter().map(|&x| GaussRat::from_int(x)).collect())
    }

    #[test]
    fn division_and_gcd() {
        let a = up(&[-1, 0, 1]);
        let b = up(&[1, 1]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(q, up(&[-1, 1]));
        assert!(r.is_zero());
        assert_eq!(a.gcd(&up(&[-1, 1]).mul(&up(&[2, 1]))), up(&[-1, 1]));
    }

    #[test]
    fn yun_multiplicities() {
        let p = up(&[-2, 1]).pow(3).mul(&up(&[1, 0, 1]));
        let sf = p.squarefree();
        assert_eq!(sf, vec![(up(&[1, 0, 1]), 1), (up(&[-2, 1]), 3)]);
    }

    #[test]
    fn interpolation_recovers() {
        let p = up(&[3, -1, 0, 2]);
        let ts: Vec<GaussRat> = (0..4).map(GaussRat::from_int).collect();
        let vs: Vec<GaussRat> = ts.iter().map(|t| p.eval(t)).collect();
        assert_eq!(UPoly::interpolate(&ts, &vs), p);
    }
}
