//! Rational self-maps of P^2 given by three forms of one degree.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::polycore::factor::line_points;
use crate::polycore::gcd::gcd_many;
use crate::polycore::linalg::{self, Matrix};
use crate::polycore::{CPoint, GaussRat, HPoly, Poly, PolyError, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("all components are zero")]
    AllZero,
    #[error("components have different degrees")]
    DegreeMismatch,
    #[error("line lies inside the indeterminacy locus")]
    LineInIndeterminacy,
    #[error("matrix is not invertible")]
    Singular,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A map (f0 : f1 : f2). Components are scaled so that the graded-lex
/// leading coefficient of the first nonzero one is 1, which makes
/// projective equality plain equality.
#[derive(Clone, Debug, PartialEq)]
pub struct RatMap {
    comps: [HPoly; 3],
    reduced: bool,
}

fn canonical(mut c: [HPoly; 3]) -> [HPoly; 3] {
    if let Some(first) = c.iter().find(|p| !p.is_zero()) {
        let lc = first.leading().unwrap().1.clone();
        if !lc.is_one() {
            let inv = lc.inv();
            for p in c.iter_mut() {
                *p = p.scale_by(&inv);
            }
        }
    }
    c
}

impl RatMap {
    /// Raw map, not reduced.
    pub fn new(comps: [HPoly; 3]) -> Result<RatMap, MapError> {
        let degs: Vec<u32> = comps.iter().filter_map(|p| p.degree()).collect();
        if degs.is_empty() {
            return Err(MapError::AllZero);
        }
        if degs.iter().any(|&d| d != degs[0]) {
            return Err(MapError::DegreeMismatch);
        }
        Ok(RatMap { comps: canonical(comps), reduced: false })
    }

    /// Reduced map from components.
    pub fn from_comps(comps: [HPoly; 3]) -> Result<RatMap, MapError> {
        Ok(RatMap::new(comps)?.reduce())
    }

    pub fn identity() -> RatMap {
        RatMap { comps: [HPoly::var(0), HPoly::var(1), HPoly::var(2)], reduced: true }
    }

    /// Linear map whose i-th component is sum_j m[i][j] x_j.
    pub fn linear(m: &[[GaussRat; 3]; 3]) -> Result<RatMap, MapError> {
        if linalg::det(&linalg::from_array3(m)).is_zero() {
            return Err(MapError::Singular);
        }
        Ok(RatMap { comps: canonical([0, 1, 2].map(|i| HPoly::linear(&m[i]))), reduced: true })
    }

    pub fn linear_int(m: [[i64; 3]; 3]) -> Result<RatMap, MapError> {
        RatMap::linear(&m.map(|r| r.map(GaussRat::from_int)))
    }

    /// Standard quadratic involution (x1x2 : x0x2 : x0x1).
    pub fn sigma() -> RatMap {
        let x = |i| HPoly::var(i);
        RatMap::from_comps([&x(1) * &x(2), &x(0) * &x(2), &x(0) * &x(1)]).unwrap()
    }

    /// (x0x1 : x2^2 : x1x2).
    pub fn rho() -> RatMap {
        let x = |i| HPoly::var(i);
        RatMap::from_comps([&x(0) * &x(1), &x(2) * &x(2), &x(1) * &x(2)]).unwrap()
    }

    /// (x0^2 : x0x1 : x1^2 - x0x2).
    pub fn tau() -> RatMap {
        let x = |i| HPoly::var(i);
        RatMap::from_comps([&x(0) * &x(0), &x(0) * &x(1), &(&x(1) * &x(1)) - &(&x(0) * &x(2))]).unwrap()
    }

    pub fn comps(&self) -> &[HPoly; 3] {
        &self.comps
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn degree(&self) -> u32 {
        self.comps.iter().find_map(|p| p.degree()).unwrap_or(0)
    }

    pub fn reduce(&self) -> RatMap {
        if self.reduced {
            return self.clone();
        }
        let g = gcd_many(self.comps.iter().filter(|p| !p.is_zero()));
        let comps = if g.is_constant() {
            self.comps.clone()
        } else {
            self.comps.clone().map(|p| if p.is_zero() { p } else { p.div_exact(&g).expect("gcd divides") })
        };
        RatMap { comps: canonical(comps), reduced: true }
    }

    /// Raw components of self o g, before reduction.
    pub fn compose_raw(&self, g: &RatMap) -> Result<RatMap, MapError> {
        RatMap::new(self.comps.clone().map(|p| p.substitute(&g.comps)))
    }

    /// Reduced composition self o g.
    pub fn compose(&self, g: &RatMap) -> Result<RatMap, MapError> {
        Ok(self.compose_raw(g)?.reduce())
    }

    /// Composition of a list, applied as written: fs[0] o fs[1] o ...
    pub fn compose_all(fs: &[RatMap]) -> Result<RatMap, MapError> {
        let mut acc = fs.last().cloned().ok_or(MapError::AllZero)?;
        for f in fs.iter().rev().skip(1) {
            acc = f.compose(&acc)?;
        }
        Ok(acc)
    }

    /// n-th iterate, reduced at every step.
    pub fn iterate(&self, n: u32) -> Result<RatMap, MapError> {
        let mut acc = RatMap::identity();
        for _ in 0..n {
            acc = self.compose(&acc)?;
        }
        Ok(acc)
    }

    pub fn jacobian(&self) -> [[HPoly; 3]; 3] {
        [0, 1, 2].map(|i| [0, 1, 2].map(|j| self.comps[i].partial(j)))
    }

    pub fn det_jacobian(&self) -> HPoly {
        let j = self.jacobian();
        let minor = |a: usize, b: usize, c: usize, d: usize| &(&j[1][a] * &j[2][b]) - &(&j[1][c] * &j[2][d]);
        let t0 = &j[0][0] * &minor(1, 2, 2, 1);
        let t1 = &j[0][1] * &minor(0, 2, 2, 0);
        let t2 = &j[0][2] * &minor(0, 1, 1, 0);
        let add = |a: HPoly, b: HPoly| a.checked_add(&b).unwrap_or_else(|_| if a.is_zero() { b } else { a });
        let sub = |a: HPoly, b: HPoly| add(a, -b);
        add(sub(t0, t1), t2)
    }

    /// Exact image, `None` at an indeterminacy point.
    pub fn eval_exact(&self, x: &[GaussRat; 3]) -> Option<[GaussRat; 3]> {
        let v = self.comps.clone().map(|p| p.eval(x));
        if v.iter().all(|c| c.is_zero()) {
            None
        } else {
            Some(v)
        }
    }

    /// Numeric image, `None` when all components vanish below `tol`
    /// relative to their absolute scale.
    pub fn evaluate(&self, p: &CPoint, tol: f64) -> Option<CPoint> {
        let v = self.comps.clone().map(|c| c.eval_c(&p.coords));
        let scale = self.comps.iter().map(|c| c.eval_abs(&p.coords)).fold(0.0, f64::max);
        let top = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if top <= tol * scale.max(f64::MIN_POSITIVE) {
            return None;
        }
        CPoint::new(v)
    }

    pub fn numeric_comps(&self) -> [Poly<Complex64>; 3] {
        self.comps.clone().map(|p| p.to_c())
    }

    /// Restriction along the line through the exact points a and b.
    pub fn restrict_to_line(&self, a: &[GaussRat; 3], b: &[GaussRat; 3]) -> Result<Contraction<GaussRat>, MapError> {
        let param = [0, 1, 2].map(|v| HPoly::linear(&[a[v].clone(), b[v].clone(), GaussRat::zero()]));
        pullback_contraction(&self.comps, &param)
    }

    /// Restriction along the exact line l(x) = 0.
    pub fn restrict_to_exact_line(&self, l: &HPoly) -> Result<Contraction<GaussRat>, MapError> {
        let (a, b) = exact_line_points(l);
        self.restrict_to_line(&a, &b)
    }

    /// Restriction along a numeric line with coefficients l.
    pub fn restrict_to_numeric_line(&self, l: &[Complex64; 3]) -> Result<Contraction<Complex64>, MapError> {
        let (a, b) = line_points(l);
        let param = [0, 1, 2].map(|v| Poly::<Complex64>::linear(&[a[v], b[v], Complex64::new(0.0, 0.0)]));
        pullback_contraction(&self.numeric_comps(), &param)
    }

    /// Matrix of a degree-1 map.
    pub fn linear_matrix(&self) -> Option<[[GaussRat; 3]; 3]> {
        if self.degree() != 1 {
            return None;
        }
        Some([0, 1, 2].map(|i| [[1, 0, 0], [0, 1, 0], [0, 0, 1]].map(|e| self.comps[i].coeff(&e))))
    }
}

/// Two exact points spanning the line l = 0.
pub fn exact_line_points(l: &HPoly) -> ([GaussRat; 3], [GaussRat; 3]) {
    let row: Matrix<GaussRat> = vec![[[1, 0, 0], [0, 1, 0], [0, 0, 1]].map(|e| l.coeff(&e)).to_vec()];
    let ns = linalg::nullspace(&row);
    let to3 = |v: &Vec<GaussRat>| [v[0].clone(), v[1].clone(), v[2].clone()];
    (to3(&ns[0]), to3(&ns[1]))
}

/// Result of pulling a map back along a parametrized curve.
#[derive(Clone, Debug)]
pub struct Contraction<K: Scalar> {
    /// Coefficient rows of the three pulled-back binary forms.
    pub rows: Matrix<K>,
    pub contracted: bool,
    pub image: Option<[K; 3]>,
}

/// Pulls the forms `f` back along `param` (binary forms in x0, x1). The
/// curve is contracted when the three pulled-back forms are proportional.
pub fn pullback_contraction<K: Scalar>(f: &[Poly<K>; 3], param: &[Poly<K>; 3]) -> Result<Contraction<K>, MapError> {
    let pulled: Vec<Poly<K>> = f.iter().map(|p| p.substitute(param)).collect();
    let d = pulled.iter().filter_map(|p| p.degree()).max().unwrap_or(0) as usize;
    let rows: Matrix<K> = pulled
        .iter()
        .map(|p| {
            let mut c = p.binary_coeffs(0, 1);
            c.resize(d + 1, K::zero());
            c
        })
        .collect();
    let rank = linalg::rank(&rows);
    if rank == 0 {
        return Err(MapError::LineInIndeterminacy);
    }
    if rank > 1 {
        return Ok(Contraction { rows, contracted: false, image: None });
    }
    let col = (0..=d)
        .max_by(|&a, &b| {
            let na: f64 = rows.iter().map(|r| r[a].magnitude()).sum();
            let nb: f64 = rows.iter().map(|r| r[b].magnitude()).sum();
            na.partial_cmp(&nb).unwrap()
        })
        .unwrap();
    let image = [rows[0][col].clone(), rows[1][col].clone(), rows[2][col].clone()];
    Ok(Contraction { rows, contracted: true, image: Some(image) })
}

impl fmt::Display for RatMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} : {} : {}]", self.comps[0], self.comps[1], self.comps[2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::cpoint::same_point;

    fn x(i: usize) -> HPoly {
        HPoly::var(i)
    }

    fn g(n: i64) -> GaussRat {
        GaussRat::from_int(n)
    }

    #[test]
    fn reduction_examples() {
        let m = &(&x(0) * &x(1)) * &x(2);
        let f = RatMap::new([&m * &x(0), &m * &x(1), &m * &x(2)]).unwrap();
        assert_eq!(f.reduce(), RatMap::identity());
        let s = RatMap::sigma();
        let ss = s.compose_raw(&s).unwrap();
        assert_eq!(ss.degree(), 4);
        assert_eq!(ss.reduce(), RatMap::identity());
        let l = RatMap::new([&x(0) * &x(0), &x(0) * &x(1), &x(0) * &x(2)]).unwrap();
        assert_eq!(l.reduce(), RatMap::identity());
    }

    #[test]
    fn jacobian_examples() {
        assert_eq!(RatMap::sigma().det_jacobian(), m3([1, 1, 1]).scale_by(&g(2)));
        let f = RatMap::from_comps([x(0).pow(3), &x(1).pow(2) * &x(2), &(&x(0) * &x(1)) * &x(2)]).unwrap();
        assert_eq!(f.det_jacobian(), m3([3, 2, 1]).scale_by(&g(3)));
        let p = RatMap::from_comps([&x(0) * &x(0), &x(1) * &x(1), &x(0) * &x(1)]).unwrap();
        assert!(p.det_jacobian().is_zero());
    }

    fn m3(e: [u32; 3]) -> HPoly {
        HPoly::monomial(e, GaussRat::one())
    }

    #[test]
    fn evaluation() {
        let s = RatMap::sigma();
        let one = [g(1), g(1), g(1)];
        assert!(same_point(&s.eval_exact(&one).unwrap(), &one));
        assert!(s.eval_exact(&[g(1), g(0), g(0)]).is_none());
        assert!(s.evaluate(&CPoint::real(1.0, 0.0, 0.0), 1e-10).is_none());
        let p = CPoint::real(0.3, -2.0, 1.5);
        assert!(RatMap::identity().evaluate(&p, 1e-10).unwrap().dist(&p) < 1e-15);
    }

    #[test]
    fn line_restrictions() {
        let s = RatMap::sigma();
        let c = s.restrict_to_exact_line(&x(0)).unwrap();
        assert!(c.contracted);
        assert!(same_point(&c.image.unwrap(), &[g(1), g(0), g(0)]));
        let c = s.restrict_to_exact_line(&(&x(0) - &x(1))).unwrap();
        assert!(!c.contracted);
        let c = RatMap::rho().restrict_to_exact_line(&x(2)).unwrap();
        assert!(c.contracted);
        assert!(same_point(&c.image.unwrap(), &[g(1), g(0), g(0)]));
    }

    #[test]
    fn rho_decomposition() {
        let a = RatMap::linear_int([[0, -1, 1], [-1, 1, 0], [0, 1, 0]]).unwrap();
        let b = RatMap::linear_int([[0, 1, 1], [0, 0, 1], [1, 0, 0]]).unwrap();
        let c = RatMap::linear_int([[1, 0, 1], [0, 1, -1], [0, 0, 1]]).unwrap();
        let s = RatMap::sigma();
        let f = RatMap::compose_all(&[a, s.clone(), b, s, c]).unwrap();
        assert_eq!(f, RatMap::rho());
    }
}
