//! Common zeros of homogeneous polynomials by elimination after a seeded
//! generic coordinate change.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cpoint::{normalize_exact, same_point, CPoint};
use super::gauss::GaussRat;
use super::gcd::{gcd_many, poly_gcd};
use super::hpoly::HPoly;
use super::linalg;
use super::resultant::resultant;
use super::roots::complex_roots;
use super::upoly::UPoly;
use super::{NumConfig, PolyError};

#[derive(Clone, Debug)]
pub struct CommonZero {
    pub point: CPoint,
    pub exact: Option<[GaussRat; 3]>,
    /// Intersection multiplicity of two generic members of the span.
    pub multiplicity: usize,
}

impl CommonZero {
    /// Same projective point, compared exactly when both are exact.
    pub fn same(&self, o: &CommonZero) -> bool {
        match (&self.exact, &o.exact) {
            (Some(a), Some(b)) => same_point(a, b),
            _ => self.point.dist(&o.point) < 1e-7,
        }
    }
}

pub(crate) fn random_invertible(rng: &mut ChaCha8Rng, r: i64) -> [[GaussRat; 3]; 3] {
    loop {
        let m: Vec<Vec<GaussRat>> = (0..3).map(|_| (0..3).map(|_| GaussRat::from_int(rng.gen_range(-r..=r))).collect()).collect();
        if !linalg::det(&m).is_zero() {
            return linalg::to_array3(&m);
        }
    }
}

fn apply(m: &[[GaussRat; 3]; 3], y: &[GaussRat; 3]) -> [GaussRat; 3] {
    [0, 1, 2].map(|i| (0..3).fold(GaussRat::zero(), |acc, j| &acc + &(&m[i][j] * &y[j])))
}

fn apply_c(m: &[[GaussRat; 3]; 3], y: &[Complex64; 3]) -> [Complex64; 3] {
    [0, 1, 2].map(|i| (0..3).map(|j| m[i][j].to_c64() * y[j]).sum())
}

/// p(a, b, z) as a polynomial in z.
fn fiber(p: &HPoly, a: &GaussRat, b: &GaussRat) -> UPoly<GaussRat> {
    let mut out = vec![GaussRat::zero(); p.degree_in(2) as usize + 1];
    for (e, c) in p.terms() {
        let t = &(c * &a.pow(e[0])) * &b.pow(e[1]);
        out[e[2] as usize] = &out[e[2] as usize] + &t;
    }
    UPoly::new(out)
}

fn fiber_c(p: &HPoly, a: Complex64, b: Complex64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); p.degree_in(2) as usize + 1];
    for (e, c) in p.terms() {
        out[e[2] as usize] += c.to_c64() * a.powu(e[0]) * b.powu(e[1]);
    }
    out
}

/// Residual of the system at y, each polynomial normalized by its absolute scale.
fn system_residual(ps: &[HPoly], y: &[Complex64; 3]) -> f64 {
    ps.iter()
        .map(|p| {
            let s = p.eval_abs(y);
            if s == 0.0 {
                0.0
            } else {
                p.eval_c(y).norm() / s
            }
        })
        .fold(0.0, f64::max)
}

enum Base {
    Exact(GaussRat, GaussRat),
    Numeric(Complex64, Complex64),
}

/// All common zeros of `polys` (equal degrees), with multiplicities.
pub fn common_zeros(polys: &[HPoly], cfg: &NumConfig) -> Result<Vec<CommonZero>, PolyError> {
    let ps: Vec<HPoly> = polys.iter().filter(|p| !p.is_zero()).cloned().collect();
    if ps.is_empty() {
        return Err(PolyError::PositiveDimensional);
    }
    let d = ps[0].degree().unwrap();
    if let Some(p) = ps.iter().find(|p| p.degree() != Some(d)) {
        return Err(PolyError::DegreeMismatch(d, p.degree().unwrap()));
    }
    if d == 0 {
        return Ok(Vec::new());
    }
    if !gcd_many(ps.iter()).is_constant() {
        return Err(PolyError::PositiveDimensional);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut last_err = PolyError::Recovery("no attempt succeeded".into());
    for attempt in 0..10 {
        let range = 2 + attempt as i64;
        let c = random_invertible(&mut rng, range);
        match attempt_zeros(&ps, &c, &mut rng, cfg) {
            Ok(z) => return Ok(z),
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

fn attempt_zeros(ps: &[HPoly], c: &[[GaussRat; 3]; 3], rng: &mut ChaCha8Rng, cfg: &NumConfig) -> Result<Vec<CommonZero>, PolyError> {
    let d = ps[0].degree().unwrap();
    let moved: Vec<HPoly> = ps.iter().map(|p| p.linear_change(c)).collect();
    let mut combos = Vec::new();
    for _ in 0..3 {
        let mut q = HPoly::zero();
        for p in &moved {
            let mut r = 0;
            while r == 0 {
                r = rng.gen_range(-6i64..=6);
            }
            q = &q + &p.scale_by(&GaussRat::from_int(r));
        }
        if q.coeff(&[0, 0, d]).is_zero() {
            return Err(PolyError::DegenerateLeading(2));
        }
        combos.push(q);
    }
    let r01 = resultant(&combos[0], &combos[1], 2)?;
    let r02 = resultant(&combos[0], &combos[2], 2)?;
    let r12 = resultant(&combos[1], &combos[2], 2)?;
    if r01.is_zero() || r02.is_zero() || r12.is_zero() {
        return Err(PolyError::Recovery("combinations share a factor".into()));
    }
    let g = poly_gcd(&poly_gcd(&r01, &r02), &r12);
    if g.is_constant() {
        return Ok(Vec::new());
    }
    let dg = g.degree().unwrap() as usize;
    let gu = UPoly::new(g.binary_coeffs(0, 1));
    let du = gu.degree().unwrap_or(0);
    let mut bases: Vec<(Base, usize)> = Vec::new();
    if du < dg {
        bases.push((Base::Exact(GaussRat::zero(), GaussRat::one()), dg - du));
    }
    for (factor, mult) in gu.squarefree() {
        let roots = complex_roots(factor.to_c().coeffs(), cfg)?;
        for r in roots {
            let exact = GaussRat::rationalize(r.z, cfg.rational_tol, cfg.max_den).filter(|t| factor.eval(t).is_zero());
            match exact {
                Some(t) => bases.push((Base::Exact(GaussRat::one(), t), mult)),
                None => bases.push((Base::Numeric(Complex64::new(1.0, 0.0), r.z), mult)),
            }
        }
    }
    let mut out: Vec<CommonZero> = Vec::new();
    for (base, mult) in bases {
        let (y_exact, y_num) = match base {
            Base::Exact(a, b) => recover_exact(&moved, &a, &b, cfg)?,
            Base::Numeric(a, b) => (None, recover_numeric(&moved, &combos[0], a, b, cfg)?),
        };
        let (exact, point) = match y_exact {
            Some(y) => {
                let x = normalize_exact(&apply(c, &y));
                let pt = CPoint::from_exact(&x);
                (Some(x), pt)
            }
            None => (None, CPoint::new(apply_c(c, &y_num)).ok_or_else(|| PolyError::Recovery("zero point".into()))?),
        };
        let z = CommonZero { point, exact, multiplicity: mult };
        if out.iter().any(|o| o.same(&z)) {
            return Err(PolyError::Recovery("projection not injective".into()));
        }
        out.push(z);
    }
    Ok(out)
}

/// Exact line x = (a, b, z): the z values are the roots of the gcd of all
/// fibers; exactly one point is expected.
fn recover_exact(ps: &[HPoly], a: &GaussRat, b: &GaussRat, cfg: &NumConfig) -> Result<(Option<[GaussRat; 3]>, [Complex64; 3]), PolyError> {
    let mut h = UPoly::zero();
    for p in ps {
        h = h.gcd(&fiber(p, a, b));
    }
    match h.degree() {
        None | Some(0) => Err(PolyError::Recovery("no point above an exact root".into())),
        Some(1) => {
            let z = -(&h.coeff(0) / &h.coeff(1));
            let y = [a.clone(), b.clone(), z];
            let yc = [y[0].to_c64(), y[1].to_c64(), y[2].to_c64()];
            Ok((Some(y), yc))
        }
        Some(_) => {
            let sf = h.squarefree();
            if sf.len() != 1 || sf[0].0.degree() != Some(1) {
                return Err(PolyError::Recovery("several points above one root".into()));
            }
            let l = &sf[0].0;
            let z = -(&l.coeff(0) / &l.coeff(1));
            let _ = cfg;
            let y = [a.clone(), b.clone(), z];
            let yc = [y[0].to_c64(), y[1].to_c64(), y[2].to_c64()];
            Ok((Some(y), yc))
        }
    }
}

fn recover_numeric(ps: &[HPoly], q0: &HPoly, a: Complex64, b: Complex64, cfg: &NumConfig) -> Result<[Complex64; 3], PolyError> {
    let f = fiber_c(q0, a, b);
    let loose = NumConfig { residual: 1e-6, ..cfg.clone() };
    let roots = complex_roots(&f, &loose)?;
    let mut best: Option<([Complex64; 3], f64)> = None;
    for r in roots {
        let y = [a, b, r.z];
        let res = system_residual(ps, &y);
        if best.as_ref().is_none_or(|(_, b)| res < *b) {
            best = Some((y, res));
        }
    }
    match best {
        Some((y, res)) if res < 1e-6 => Ok(y),
        _ => Err(PolyError::Recovery("no numeric point above a root".into())),
    }
}

/// Order of vanishing of p at an exact point.
pub fn vanishing_order_exact(p: &HPoly, x: &[GaussRat; 3]) -> u32 {
    let mut level = vec![(p.clone(), 0usize)];
    for k in 0..=p.degree().unwrap_or(0) {
        if level.iter().any(|(q, _)| !q.eval(x).is_zero()) {
            return k;
        }
        level = next_level(&level);
    }
    p.degree().unwrap_or(0)
}

/// Order of vanishing at a numeric point with relative tolerance `tol`.
pub fn vanishing_order_numeric(p: &HPoly, x: &CPoint, tol: f64) -> u32 {
    let mut level = vec![(p.clone(), 0usize)];
    for k in 0..=p.degree().unwrap_or(0) {
        let hit = level.iter().any(|(q, _)| {
            let s = q.eval_abs(&x.coords);
            s > 0.0 && q.eval_c(&x.coords).norm() > tol * s
        });
        if hit {
            return k;
        }
        level = next_level(&level);
    }
    p.degree().unwrap_or(0)
}

fn next_level(level: &[(HPoly, usize)]) -> Vec<(HPoly, usize)> {
    let mut out = Vec::new();
    for (q, last) in level {
        for v in *last..3 {
            let dq = q.partial(v);
            if !dq.is_zero() {
                out.push((dq, v));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> HPoly {
        HPoly::var(i)
    }

    #[test]
    fn sigma_indeterminacy() {
        let s = [&x(1) * &x(2), &x(0) * &x(2), &x(0) * &x(1)];
        let z = common_zeros(&s, &NumConfig::default()).unwrap();
        assert_eq!(z.len(), 3);
        assert!(z.iter().all(|p| p.multiplicity == 1 && p.exact.is_some()));
        let total: usize = z.iter().map(|p| p.multiplicity).sum();
        assert_eq!(total, 3);
    }

    #[test]
    fn tangent_conics_have_double_point() {
        // x0*x2 - x1^2 and x0*x2 meet at (0:0:1) twice and (1:0:0) twice
        let a = &(&x(0) * &x(2)) - &(&x(1) * &x(1));
        let b = &x(0) * &x(2);
        let z = common_zeros(&[a, b], &NumConfig::default()).unwrap();
        let total: usize = z.iter().map(|p| p.multiplicity).sum();
        assert_eq!(total, 4);
        assert_eq!(z.len(), 2);
    }

    #[test]
    fn orders() {
        let p = &(&x(0) * &x(1)) * &x(2);
        let pt = [GaussRat::one(), GaussRat::zero(), GaussRat::zero()];
        assert_eq!(vanishing_order_exact(&p, &pt), 2);
        assert_eq!(vanishing_order_numeric(&p, &CPoint::real(1.0, 0.0, 0.0), 1e-9), 2);
    }
}
