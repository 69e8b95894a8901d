use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::gauss::GaussRat;
use super::hpoly::HPoly;
use super::upoly::UPoly;

/// Sparse polynomial over Q(i) in a fixed number of variables, not
/// necessarily homogeneous.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, GaussRat>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: GaussRat) -> Self {
        let mut p = Self::zero(nvars);
        p.push(vec![0; nvars], c);
        p
    }

    pub fn int(nvars: usize, c: i64) -> Self {
        Self::constant(nvars, GaussRat::from_int(c))
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.push(e, GaussRat::one());
        p
    }

    pub fn from_hpoly(h: &HPoly, nvars: usize) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in h.terms() {
            let mut v = vec![0; nvars];
            v[..3].copy_from_slice(e);
            p.push(v, c.clone());
        }
        p
    }

    fn push(&mut self, e: Vec<u32>, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        let remove = match self.terms.get_mut(&e) {
            Some(v) => {
                *v = &*v + &c;
                v.is_zero()
            }
            None => {
                self.terms.insert(e.clone(), c);
                false
            }
        };
        if remove {
            self.terms.remove(&e);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &GaussRat)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    pub fn constant_value(&self) -> Option<GaussRat> {
        if self.is_zero() {
            return Some(GaussRat::zero());
        }
        if self.terms.len() == 1 {
            let (e, c) = self.terms.iter().next().unwrap();
            if e.iter().all(|&x| x == 0) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn scale(&self, k: &GaussRat) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            p.push(e.clone(), c * k);
        }
        p
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::int(self.nvars, 1);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn partial(&self, i: usize) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                p.push(e2, c * &GaussRat::from_int(e[i] as i64));
            }
        }
        p
    }

    pub fn eval(&self, x: &[GaussRat]) -> GaussRat {
        let mut acc = GaussRat::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = &t * &x[i].pow(k);
                }
            }
            acc = &acc + &t;
        }
        acc
    }

    pub fn eval_c(&self, x: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = c.to_c64();
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t *= x[i].powu(k);
                }
            }
            acc += t;
        }
        acc
    }

    /// Replaces variable i by `g[i]`; all `g` share one variable count.
    pub fn substitute(&self, g: &[MPoly]) -> MPoly {
        let n = g[0].nvars;
        let mut cache: Vec<Vec<MPoly>> = g.iter().map(|gi| vec![MPoly::int(n, 1), gi.clone()]).collect();
        let mut out = MPoly::zero(n);
        for (e, c) in &self.terms {
            let mut t = MPoly::constant(n, c.clone());
            for (i, &k) in e.iter().enumerate() {
                while cache[i].len() <= k as usize {
                    let nxt = cache[i].last().unwrap() * &g[i];
                    cache[i].push(nxt);
                }
                if k > 0 {
                    t = &t * &cache[i][k as usize];
                }
            }
            out = &out + &t;
        }
        out
    }

    /// Coefficients with respect to variable i, from low to high power.
    pub fn coeffs_in(&self, i: usize) -> Vec<MPoly> {
        let d = self.degree_in(i) as usize;
        let mut out = vec![MPoly::zero(self.nvars); d + 1];
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[i] = 0;
            out[e[i] as usize].push(e2, c.clone());
        }
        out
    }

    /// Univariate view when only variable i occurs.
    pub fn to_upoly(&self, i: usize) -> Option<UPoly<GaussRat>> {
        let mut c = vec![GaussRat::zero(); self.degree_in(i) as usize + 1];
        for (e, v) in &self.terms {
            if e.iter().enumerate().any(|(j, &k)| j != i && k > 0) {
                return None;
            }
            c[e[i] as usize] = v.clone();
        }
        Some(UPoly::new(c))
    }

    /// Writes the polynomial with the given variable names.
    pub fn render(&self, names: &[&str]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (idx, (e, c)) in self.terms.iter().rev().enumerate() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(j, &k)| if k == 1 { names[j].to_string() } else { format!("{}^{}", names[j], k) })
                .collect();
            let cs = c.to_string();
            let (neg, mag) = match cs.strip_prefix('-') {
                Some(rest) if c.is_real() => (true, rest.to_string()),
                _ => (false, cs.clone()),
            };
            if idx > 0 {
                s.push_str(if neg { " - " } else { " + " });
            } else if neg {
                s.push('-');
            }
            if mono.is_empty() {
                s.push_str(&mag);
            } else if mag == "1" {
                s.push_str(&mono.join("*"));
            } else {
                s.push_str(&format!("{}*{}", mag, mono.join("*")));
            }
        }
        s
    }
}

impl Add for &MPoly {
    type Output = MPoly;
    fn add(self, o: &MPoly) -> MPoly {
        let mut p = self.clone();
        for (e, c) in &o.terms {
            p.push(e.clone(), c.clone());
        }
        p
    }
}

impl Sub for &MPoly {
    type Output = MPoly;
    fn sub(self, o: &MPoly) -> MPoly {
        let mut p = self.clone();
        for (e, c) in &o.terms {
            p.push(e.clone(), -c);
        }
        p
    }
}

impl Mul for &MPoly {
    type Output = MPoly;
    fn mul(self, o: &MPoly) -> MPoly {
        let mut p = MPoly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.push(e, c1 * c2);
            }
        }
        p
    }
}

impl Neg for &MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        self.scale(&GaussRat::from_int(-1))
    }
}

impl Add for MPoly {
    type Output = MPoly;
    fn add(self, o: MPoly) -> MPoly {
        &self + &o
    }
}

impl Sub for MPoly {
    type Output = MPoly;
    fn sub(self, o: MPoly) -> MPoly {
        &self - &o
    }
}

impl Mul for MPoly {
    type Output = MPoly;
    fn mul(self, o: MPoly) -> MPoly {
        &self * &o
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitution_and_coefficients() {
        let x = MPoly::var(2, 0);
        let y = MPoly::var(2, 1);
        let p = &(&x * &x) + &y;
        let q = p.substitute(&[&x + &y, y.clone()]);
        let expect = &(&(&x * &x) + (&(&x * &y).scale(&GaussRat::from_int(2)))) + &(&(&y * &y) + &y);
        assert_eq!(q, expect);
        let cs = q.coeffs_in(0);
        assert_eq!(cs.len(), 3);
        assert_eq!(cs[2], MPoly::int(2, 1));
        assert_eq!(p.render(&["a", "b"]), "a^2 + b");
    }
}
