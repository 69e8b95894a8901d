//! The foliation attached to a rational map, its singular points, index sums
//! and the fibers of f -> F(f) in degree 2.

use num_complex::Complex64;
use thiserror::Error;

use crate::birat::{self, BiratError, Mat3};
use crate::polycore::gcd::gcd_many;
use crate::polycore::linalg::{self, Matrix};
use crate::polycore::zeros::common_zeros;
use crate::polycore::{CPoint, GaussRat, HPoly, Mono, NumConfig, PolyError};
use crate::ratmap::{MapError, RatMap};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FoliationError {
    #[error("map is proportional to the identity; the 1-form vanishes")]
    IdentityMap,
    #[error("singular locus is positive dimensional")]
    PositiveDimensional,
    #[error("singular point of multiplicity {0}: index undefined")]
    NonSimple(usize),
    #[error("singular points are not exactly representable")]
    NotExact,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("point lies at infinity of every affine chart")]
    NoChart,
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Birat(#[from] BiratError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// The 1-form F0 dx0 + F1 dx1 + F2 dx2 with its common factor removed.
#[derive(Clone, Debug, PartialEq)]
pub struct Foliation1Form {
    pub omega: [HPoly; 3],
    pub gcd_part: HPoly,
    pub degree: u32,
}

impl Foliation1Form {
    /// Reduces and normalizes a twisted 1-form; the gcd is kept aside.
    pub fn from_omega(raw: [HPoly; 3]) -> Result<Foliation1Form, FoliationError> {
        if raw.iter().all(|p| p.is_zero()) {
            return Err(FoliationError::IdentityMap);
        }
        let g = gcd_many(raw.iter().filter(|p| !p.is_zero())).monic();
        let mut omega = raw.map(|p| if p.is_zero() { p } else { p.div_exact(&g).expect("gcd divides") });
        let lead = omega.iter().find_map(|p| p.leading().map(|(_, c)| c.clone())).unwrap();
        let inv = lead.inv();
        omega = omega.map(|p| p.scale_by(&inv));
        let deg = omega.iter().find_map(|p| p.degree()).unwrap();
        Ok(Foliation1Form { omega, gcd_part: g, degree: deg.saturating_sub(1) })
    }

    /// x0 F0 + x1 F1 + x2 F2.
    pub fn euler_contraction(&self) -> HPoly {
        let mut acc = HPoly::zero();
        for (i, p) in self.omega.iter().enumerate() {
            acc = acc.checked_add(&(&HPoly::var(i) * p)).unwrap_or(acc);
        }
        acc
    }

    /// Pullback by the linear map x -> A x.
    pub fn pullback_linear(&self, a: &Mat3) -> Result<Foliation1Form, FoliationError> {
        let moved: Vec<HPoly> = self.omega.iter().map(|p| p.linear_change(a)).collect();
        let comps = [0, 1, 2].map(|j| {
            let mut acc = HPoly::zero();
            for i in 0..3 {
                let t = moved[i].scale_by(&a[i][j]);
                acc = acc.checked_add(&t).unwrap_or(acc);
            }
            acc
        });
        Foliation1Form::from_omega(comps)
    }

    /// Same foliation up to the removed factor.
    pub fn same_foliation(&self, o: &Foliation1Form) -> bool {
        self.omega == o.omega
    }

    /// dH ^ omega = 0 for H = p / q.
    pub fn is_first_integral(&self, p: &HPoly, q: &HPoly) -> bool {
        let dh: Vec<HPoly> = (0..3).map(|v| sub_any(&(q * &p.partial(v)), &(p * &q.partial(v)))).collect();
        [(0, 1), (0, 2), (1, 2)]
            .iter()
            .all(|&(i, j)| sub_any(&(&dh[i] * &self.omega[j]), &(&dh[j] * &self.omega[i])).is_zero())
    }

    pub fn is_pencil(&self) -> bool {
        self.degree == 0
    }
}

fn sub_any(p: &HPoly, q: &HPoly) -> HPoly {
    match p.checked_sub(q) {
        Ok(r) => r,
        Err(_) if p.is_zero() => -q.clone(),
        Err(_) => p.clone(),
    }
}

pub fn foliation_of(f: &RatMap) -> Result<Foliation1Form, FoliationError> {
    Foliation1Form::from_omega(birat::cross_forms(&f.reduce()))
}

/// The curve of fixed points carried by the common factor of x ^ f.
pub fn has_fixed_curve(f: &RatMap) -> Result<Option<HPoly>, FoliationError> {
    let fol = foliation_of(f)?;
    Ok(if fol.gcd_part.is_constant() { None } else { Some(fol.gcd_part) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointKind {
    Fixed,
    Indeterminacy,
}

#[derive(Clone, Debug)]
pub struct SingularPoint {
    pub point: CPoint,
    pub exact: Option<[GaussRat; 3]>,
    pub kind: PointKind,
    pub multiplicity: usize,
    /// tr and det of Df - id in an affine chart, at fixed points.
    pub trace: Option<Complex64>,
    pub det: Option<Complex64>,
    pub baum_bott: Option<Complex64>,
}

/// Chart x_k = 1 with the point rescaled, tried in the order x2, x1, x0.
fn chart(p: &CPoint) -> Option<(usize, usize, usize, [Complex64; 3])> {
    for k in [2, 1, 0] {
        if p.coords[k].norm() >= 1e-8 {
            let y = p.coords.map(|z| z / p.coords[k]);
            let (i, j) = match k {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            return Some((k, i, j, y));
        }
    }
    None
}

/// Affine jacobian of f at a point where f is defined and f_k does not vanish.
pub fn affine_jacobian(f: &RatMap, p: &CPoint) -> Result<[[Complex64; 2]; 2], FoliationError> {
    let (k, i, j, y) = chart(p).ok_or(FoliationError::NoChart)?;
    let c = f.comps();
    let fk = c[k].eval_c(&y);
    if fk.norm() < 1e-12 {
        return Err(FoliationError::NoChart);
    }
    let idx = [i, j];
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (ra, &a) in idx.iter().enumerate() {
        let fa = c[a].eval_c(&y);
        for (cb, &b) in idx.iter().enumerate() {
            let dfa = c[a].partial(b).eval_c(&y);
            let dfk = c[k].partial(b).eval_c(&y);
            out[ra][cb] = (dfa * fk - fa * dfk) / (fk * fk);
        }
    }
    Ok(out)
}

/// Baum-Bott index tr^2/det of the dual vector field in the first usable chart.
pub fn baum_bott(fol: &Foliation1Form, p: &CPoint) -> Result<Complex64, FoliationError> {
    let (_, i, j, y) = chart(p).ok_or(FoliationError::NoChart)?;
    let a = &fol.omega[i];
    let b = &fol.omega[j];
    let d = |h: &HPoly, v: usize| h.partial(v).eval_c(&y);
    let tr = d(a, j) - d(b, i);
    let det = d(b, j) * d(a, i) - d(b, i) * d(a, j);
    Ok(tr * tr / det)
}

pub fn singular_points(fol: &Foliation1Form, f: &RatMap, cfg: &NumConfig) -> Result<Vec<SingularPoint>, FoliationError> {
    let zeros = match common_zeros(&fol.omega, cfg) {
        Ok(z) => z,
        Err(PolyError::PositiveDimensional) => return Err(FoliationError::PositiveDimensional),
        Err(e) => return Err(e.into()),
    };
    let f = f.reduce();
    let mut out = Vec::new();
    for z in zeros {
        let indet = match &z.exact {
            Some(e) => f.eval_exact(e).is_none(),
            None => f.evaluate(&z.point, 1e-8).is_none(),
        };
        let mut sp = SingularPoint {
            point: z.point,
            exact: z.exact.clone(),
            kind: if indet { PointKind::Indeterminacy } else { PointKind::Fixed },
            multiplicity: z.multiplicity,
            trace: None,
            det: None,
            baum_bott: None,
        };
        if !indet {
            if let Ok(m) = affine_jacobian(&f, &z.point) {
                let one = Complex64::new(1.0, 0.0);
                sp.trace = Some(m[0][0] + m[1][1] - 2.0 * one);
                sp.det = Some((m[0][0] - one) * (m[1][1] - one) - m[0][1] * m[1][0]);
            }
        }
        if z.multiplicity == 1 {
            sp.baum_bott = baum_bott(fol, &z.point).ok();
        }
        out.push(sp);
    }
    Ok(out)
}

/// nu^2 + nu + 1.
pub fn expected_singular_count(nu: u32) -> usize {
    (nu * nu + nu + 1) as usize
}

/// (S1, S2) = (sum tr/det, sum 1/det) of Df - id over the fixed points.
pub fn guillot_sums(f: &RatMap, cfg: &NumConfig) -> Result<(Complex64, Complex64), FoliationError> {
    let fixed = birat::fixed_points(f, cfg)?;
    if let Some(z) = fixed.iter().find(|z| z.multiplicity != 1) {
        return Err(FoliationError::NonSimple(z.multiplicity));
    }
    let one = Complex64::new(1.0, 0.0);
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut s2 = Complex64::new(0.0, 0.0);
    for z in &fixed {
        let m = affine_jacobian(&f.reduce(), &z.point)?;
        let tr = m[0][0] + m[1][1] - 2.0 * one;
        let det = (m[0][0] - one) * (m[1][1] - one) - m[0][1] * m[1][0];
        s1 += tr / det;
        s2 += one / det;
    }
    Ok((s1, s2))
}

/// Sum of Baum-Bott indices over a singular locus made of simple points.
pub fn baum_bott_sum(f: &RatMap, cfg: &NumConfig) -> Result<Complex64, FoliationError> {
    let fol = foliation_of(f)?;
    let pts = singular_points(&fol, f, cfg)?;
    let mut s = Complex64::new(0.0, 0.0);
    for p in &pts {
        if p.multiplicity != 1 {
            return Err(FoliationError::NonSimple(p.multiplicity));
        }
        s += baum_bott(&fol, &p.point)?;
    }
    Ok(s)
}

fn monomials(d: u32) -> Vec<Mono> {
    let mut out = Vec::new();
    for a in (0..=d).rev() {
        for b in (0..=d - a).rev() {
            out.push([a, b, d - a - b]);
        }
    }
    out
}

/// Linear conditions x ^ F = omega on the coefficients of F (degree d).
fn cross_system(d: u32) -> (Vec<Mono>, Vec<Mono>, Matrix<GaussRat>) {
    let ins = monomials(d);
    let outs = monomials(d + 1);
    let n = ins.len();
    let mut m = vec![vec![GaussRat::zero(); 3 * n]; 3 * outs.len()];
    let row = |e: &Mono| outs.iter().position(|o| o == e).unwrap();
    // component r of x ^ F is x_a F_b - x_b F_a
    for (r, (a, b)) in [(1usize, 2usize), (2, 0), (0, 1)].into_iter().enumerate() {
        for (k, e) in ins.iter().enumerate() {
            let mut ea = *e;
            ea[a] += 1;
            let mut eb = *e;
            eb[b] += 1;
            let base = r * outs.len();
            m[base + row(&ea)][b * n + k] = &m[base + row(&ea)][b * n + k] + &GaussRat::one();
            m[base + row(&eb)][a * n + k] = &m[base + row(&eb)][a * n + k] - &GaussRat::one();
        }
    }
    (ins, outs, m)
}

fn map_from_vector(ins: &[Mono], v: &[GaussRat]) -> [HPoly; 3] {
    let n = ins.len();
    [0, 1, 2].map(|c| HPoly::from_terms(ins.iter().enumerate().map(|(k, e)| (*e, v[c * n + k].clone()))).unwrap())
}

/// A map F of degree nu with x ^ F = omega.
pub fn map_for_foliation(fol: &Foliation1Form) -> Result<RatMap, FoliationError> {
    let (ins, outs, m) = cross_system(fol.degree);
    let nout = outs.len();
    let mut rhs = vec![GaussRat::zero(); 3 * nout];
    for (r, p) in fol.omega.iter().enumerate() {
        for (e, c) in p.terms() {
            let k = outs.iter().position(|o| o == e).ok_or(FoliationError::Precondition("form has wrong degree".into()))?;
            rhs[r * nout + k] = c.clone();
        }
    }
    let v = linalg::solve(&m, &rhs).ok_or(FoliationError::Precondition("form is not of the shape x ^ F".into()))?;
    Ok(RatMap::new(map_from_vector(&ins, &v))?)
}

/// The degree-2 foliation singular at seven given points.
pub fn foliation_through_points(pts: &[[GaussRat; 3]]) -> Result<Foliation1Form, FoliationError> {
    let (ins, _, _) = cross_system(2);
    let n = ins.len();
    let mut rows: Matrix<GaussRat> = Vec::new();
    for p in pts {
        let vals: Vec<GaussRat> = ins.iter().map(|e| p[0].pow(e[0]) * p[1].pow(e[1]) * p[2].pow(e[2])).collect();
        for (a, b) in [(1usize, 2usize), (2, 0), (0, 1)] {
            let mut r = vec![GaussRat::zero(); 3 * n];
            for k in 0..n {
                r[b * n + k] = &p[a] * &vals[k];
                r[a * n + k] = -(&p[b] * &vals[k]);
            }
            rows.push(r);
        }
    }
    for v in linalg::nullspace(&rows) {
        let f = RatMap::new(map_from_vector(&ins, &v));
        if let Ok(f) = f {
            if let Ok(fol) = Foliation1Form::from_omega(birat::cross_forms(&f)) {
                return Ok(fol);
            }
        }
    }
    Err(FoliationError::Precondition("points impose too many conditions".into()))
}

#[derive(Clone, Debug)]
pub struct FiberReport {
    pub maps: Vec<RatMap>,
    pub aligned: Vec<[usize; 3]>,
    pub rejected: Vec<[usize; 3]>,
}

/// Birational quadratic maps F + l id with foliation `fol`, one for each
/// admissible choice of three singular points as indeterminacy points.
pub fn fiber(fol: &Foliation1Form, cfg: &NumConfig) -> Result<FiberReport, FoliationError> {
    if fol.degree != 2 {
        return Err(FoliationError::Precondition(format!("foliation of degree {} has a non finite fiber", fol.degree)));
    }
    let f = map_for_foliation(fol)?;
    let sing = singular_points(fol, &f, cfg)?;
    if sing.len() != 7 {
        return Err(FoliationError::NonSimple(sing.iter().map(|s| s.multiplicity).max().unwrap_or(0)));
    }
    let pts: Vec<[GaussRat; 3]> = sing.iter().map(|s| s.exact.clone().ok_or(FoliationError::NotExact)).collect::<Result<_, _>>()?;
    let eta: Vec<GaussRat> = pts
        .iter()
        .map(|m| {
            let img: Vec<GaussRat> = f.comps().iter().map(|c| c.eval(m)).collect();
            let k = (0..3).find(|&k| !m[k].is_zero()).unwrap();
            &img[k] / &m[k]
        })
        .collect();
    let mut rep = FiberReport { maps: Vec::new(), aligned: Vec::new(), rejected: Vec::new() };
    for a in 0..7 {
        for b in a + 1..7 {
            for c in b + 1..7 {
                let tri = [a, b, c];
                let m: Matrix<GaussRat> = tri.iter().map(|&t| pts[t].to_vec()).collect();
                if linalg::det(&m).is_zero() {
                    rep.aligned.push(tri);
                    continue;
                }
                let rhs: Vec<GaussRat> = tri.iter().map(|&t| -eta[t].clone()).collect();
                let l = linalg::solve(&m, &rhs).expect("independent points");
                let lf = HPoly::linear(&[l[0].clone(), l[1].clone(), l[2].clone()]);
                let comps = [0, 1, 2].map(|i| sub_any(&f.comps()[i], &-(&lf * &HPoly::var(i))));
                match admissible(comps, fol, cfg) {
                    Some(q) => {
                        if !rep.maps.contains(&q) {
                            rep.maps.push(q);
                        }
                    }
                    None => rep.rejected.push(tri),
                }
            }
        }
    }
    Ok(rep)
}

fn admissible(comps: [HPoly; 3], fol: &Foliation1Form, cfg: &NumConfig) -> Option<RatMap> {
    let q = RatMap::new(comps).ok()?.reduce();
    if q.degree() != 2 {
        return None;
    }
    let w = birat::is_birational_quadratic(&q, cfg).ok()?;
    if !w.birational {
        return None;
    }
    let g = foliation_of(&q).ok()?;
    (g.same_foliation(fol) && g.gcd_part.is_constant()).then_some(q)
}

pub fn count_preimages(fol: &Foliation1Form, cfg: &NumConfig) -> Result<usize, FoliationError> {
    Ok(fiber(fol, cfg)?.maps.len())
}

/// The fiber through sigma, computed.
pub fn foliation_fiber_sigma(cfg: &NumConfig) -> Result<Vec<RatMap>, FoliationError> {
    Ok(fiber(&foliation_of(&RatMap::sigma())?, cfg)?.maps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> HPoly {
        HPoly::var(i)
    }

    fn g(n: i64) -> GaussRat {
        GaussRat::from_int(n)
    }

    fn f23() -> RatMap {
        RatMap::from_comps([
            &(&x(0).scale_by(&g(2)) + &x(1)) * &x(2),
            (&x(1) * &(&x(0) + &x(2))).scale_by(&g(3)),
            &x(2) * &(&x(0) + &x(2)),
        ])
        .unwrap()
    }

    #[test]
    fn sigma_foliation() {
        let fol = foliation_of(&RatMap::sigma()).unwrap();
        assert_eq!(fol.degree, 2);
        assert!(fol.euler_contraction().is_zero());
        assert!(fol.gcd_part.is_constant());
        let p = &(&x(0) * &x(0)) - &(&x(2) * &x(2));
        let q = &(&x(1) * &x(1)) - &(&x(2) * &x(2));
        assert!(fol.is_first_integral(&p, &q));
        assert!(!fol.is_first_integral(&p, &(&x(1) * &x(1))));
        assert_eq!(has_fixed_curve(&RatMap::sigma()).unwrap(), None);
    }

    #[test]
    fn fixed_curves() {
        let f = RatMap::from_comps([&x(0) * &x(2), &x(1) * &x(2), &x(0) * &x(1)]).unwrap();
        let fol = foliation_of(&f).unwrap();
        assert!(fol.is_pencil());
        assert_eq!(has_fixed_curve(&f).unwrap().unwrap(), (&(&x(2) * &x(2)) - &(&x(0) * &x(1))).monic());
        let f = RatMap::from_comps([
            &x(0) * &x(1),
            &(&(&x(1) * &x(2)) - &(&x(0) * &x(2))) + &(&x(0) * &x(1)).scale_by(&g(2)),
            &x(1) * &x(2),
        ])
        .unwrap();
        let conic = &(&(&(&x(1) * &x(1)) - &(&x(1) * &x(2))) + &(&x(0) * &x(2))) - &(&x(0) * &x(1)).scale_by(&g(2));
        assert_eq!(has_fixed_curve(&f).unwrap().unwrap(), conic.monic());
        assert_eq!(foliation_of(&RatMap::identity()).unwrap_err(), FoliationError::IdentityMap);
    }

    #[test]
    fn sigma_singular_points() {
        let cfg = NumConfig::default();
        let fol = foliation_of(&RatMap::sigma()).unwrap();
        let pts = singular_points(&fol, &RatMap::sigma(), &cfg).unwrap();
        assert_eq!(pts.len(), 7);
        assert_eq!(pts.iter().filter(|p| p.kind == PointKind::Fixed).count(), 4);
        for p in pts.iter().filter(|p| p.kind == PointKind::Fixed) {
            assert!((p.trace.unwrap() + 4.0).norm() < 1e-9);
            assert!((p.det.unwrap() - 4.0).norm() < 1e-9);
            let bb = p.baum_bott.unwrap();
            assert!((bb - p.trace.unwrap().powi(2) / p.det.unwrap()).norm() < 1e-9);
        }
        let (s1, s2) = guillot_sums(&RatMap::sigma(), &cfg).unwrap();
        assert!((s1 + 4.0).norm() < 1e-9 && (s2 - 1.0).norm() < 1e-9);
        assert!((baum_bott_sum(&RatMap::sigma(), &cfg).unwrap() - 16.0).norm() < 1e-8);
    }

    #[test]
    fn multiplicities_of_f23() {
        let f = f23();
        let fol = foliation_of(&f).unwrap();
        assert_eq!(fol.degree, 2);
        let pts = singular_points(&fol, &f, &NumConfig::default()).unwrap();
        let total: usize = pts.iter().map(|p| p.multiplicity).sum();
        assert_eq!(total, 7);
        let e1 = [g(0), g(1), g(0)];
        let p = pts.iter().find(|p| p.exact.as_ref().is_some_and(|e| crate::polycore::cpoint::same_point(e, &e1))).unwrap();
        assert_eq!(p.multiplicity, 3);
        assert_eq!(pts.len(), 5);
    }

    #[test]
    fn sigma_fiber() {
        let cfg = NumConfig::default();
        let maps = foliation_fiber_sigma(&cfg).unwrap();
        assert_eq!(maps.len(), 5);
        assert!(maps.contains(&RatMap::sigma()));
        let s = RatMap::sigma();
        let l = &(&x(0) + &x(1)) + &x(2);
        let q1 = RatMap::from_comps([0, 1, 2].map(|i| &s.comps()[i] + &(&l * &x(i)))).unwrap();
        assert!(maps.contains(&q1));
    }

    #[test]
    fn generic_fiber_has_35_points() {
        let raw = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1], [1, 2, 5], [3, -1, 2], [2, 7, -3]];
        let pts: Vec<[GaussRat; 3]> = raw.iter().map(|r| r.map(g)).collect();
        let fol = foliation_through_points(&pts).unwrap();
        assert_eq!(fol.degree, 2);
        assert_eq!(count_preimages(&fol, &NumConfig::default()).unwrap(), 35);
    }

    #[test]
    fn pencil_is_refused() {
        let fol = Foliation1Form::from_omega([x(1), -x(0), HPoly::zero()]).unwrap();
        assert!(matches!(count_preimages(&fol, &NumConfig::default()), Err(FoliationError::Precondition(_))));
    }
}
