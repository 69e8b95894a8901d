//! Birationality tests, linear relations, quadratic strata, inverses and
//! normal forms.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::polycore::cpoint::same_point;
use crate::polycore::factor::{lines_and_conics, CompKind, Component};
use crate::polycore::gcd::restrict_line;
use crate::polycore::linalg::{self, Matrix};
use crate::polycore::mpoly::MPoly;
use crate::polycore::roots::complex_roots;
use crate::polycore::upoly::UPoly;
use crate::polycore::zeros::{common_zeros, vanishing_order_exact, vanishing_order_numeric, CommonZero};
use crate::polycore::{CPoint, CPoly, GaussRat, HPoly, Mono, NumConfig, Poly, PolyError, Scalar};
use crate::ratmap::{pullback_contraction, MapError, RatMap};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BiratError {
    #[error("degenerate map: det jac vanishes identically")]
    Degenerate,
    #[error("expected a quadratic map, got degree {0}")]
    NotQuadratic(u32),
    #[error("wedge product vanishes identically")]
    ZeroWedge,
    #[error("map is not birational")]
    NotBirational,
    #[error("fixed-point curve or alignment: {0}")]
    FixedPoints(String),
    #[error("points are not exactly representable")]
    NotExact,
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

pub type Mat3 = [[GaussRat; 3]; 3];

fn monomials(d: u32) -> Vec<Mono> {
    let mut out = Vec::new();
    for a in (0..=d).rev() {
        for b in (0..=d - a).rev() {
            out.push([a, b, d - a - b]);
        }
    }
    out
}

/// Linear relations L0 f0 + L1 f1 + L2 f2 = 0 with linear L_i; row i of a
/// basis matrix holds the coefficients of L_i.
#[derive(Clone, Debug)]
pub struct RelationSpace {
    pub basis: Vec<Mat3>,
    pub dim: usize,
}

pub fn relation_space(f: &RatMap) -> RelationSpace {
    let d = f.degree();
    let monos = monomials(d + 1);
    let idx = |e: &Mono| monos.iter().position(|m| m == e).unwrap();
    let mut m: Matrix<GaussRat> = vec![vec![GaussRat::zero(); 9]; monos.len()];
    for i in 0..3 {
        for j in 0..3 {
            let mut e1 = [0, 0, 0];
            e1[j] = 1;
            for (e, c) in f.comps()[i].mul_mono(&e1).terms() {
                m[idx(e)][3 * i + j] = c.clone();
            }
        }
    }
    let basis: Vec<Mat3> = linalg::nullspace(&m).into_iter().map(|v| [0, 1, 2].map(|i| [0, 1, 2].map(|j| v[3 * i + j].clone()))).collect();
    RelationSpace { dim: basis.len(), basis }
}

/// True when `l` lies in the span of the relation basis.
pub fn in_relation_span(rs: &RelationSpace, l: &Mat3) -> bool {
    let mut m: Matrix<GaussRat> = rs.basis.iter().map(|b| b.iter().flatten().cloned().collect()).collect();
    let r0 = linalg::rank(&m);
    m.push(l.iter().flatten().cloned().collect());
    linalg::rank(&m) == r0
}

/// The 10 x 9 matrix whose kernel holds the coefficient vectors
/// (a0,b0,c0,a1,b1,c1,a2,b2,c2) of relations with L_i = a_i x0 + b_i x1 + c_i x2.
pub fn matrix_m(q: &RatMap) -> Result<Matrix<GaussRat>, BiratError> {
    if q.degree() != 2 {
        return Err(BiratError::NotQuadratic(q.degree()));
    }
    let co = |i: usize, e: Mono| q.comps()[i].coeff(&e);
    let a: Vec<GaussRat> = (0..3).map(|i| co(i, [2, 0, 0])).collect();
    let b: Vec<GaussRat> = (0..3).map(|i| co(i, [0, 2, 0])).collect();
    let c: Vec<GaussRat> = (0..3).map(|i| co(i, [0, 0, 2])).collect();
    let dd: Vec<GaussRat> = (0..3).map(|i| co(i, [0, 1, 1])).collect();
    let e: Vec<GaussRat> = (0..3).map(|i| co(i, [1, 0, 1])).collect();
    let f: Vec<GaussRat> = (0..3).map(|i| co(i, [1, 1, 0])).collect();
    let z = GaussRat::zero;
    let row = |p: &dyn Fn(usize) -> [GaussRat; 3]| -> Vec<GaussRat> { (0..3).flat_map(p).collect() };
    Ok(vec![
        row(&|i| [a[i].clone(), z(), z()]),
        row(&|i| [z(), b[i].clone(), z()]),
        row(&|i| [z(), z(), c[i].clone()]),
        row(&|i| [b[i].clone(), f[i].clone(), z()]),
        row(&|i| [f[i].clone(), a[i].clone(), z()]),
        row(&|i| [c[i].clone(), z(), e[i].clone()]),
        row(&|i| [e[i].clone(), z(), a[i].clone()]),
        row(&|i| [z(), c[i].clone(), dd[i].clone()]),
        row(&|i| [z(), dd[i].clone(), b[i].clone()]),
        row(&|i| [dd[i].clone(), e[i].clone(), f[i].clone()]),
    ])
}

pub fn rank_m(q: &RatMap) -> Result<usize, BiratError> {
    Ok(linalg::rank(&matrix_m(q)?))
}

/// A component of the curve det jac f = 0 and its behaviour under f.
#[derive(Clone, Debug)]
pub struct ExcComponent {
    pub kind: CompKind,
    pub exact: Option<HPoly>,
    pub numeric: CPoly,
    pub mult: usize,
    pub contracted: bool,
    pub image: Option<CPoint>,
    pub image_exact: Option<[GaussRat; 3]>,
}

/// Contraction analysis of one line or conic.
pub fn analyze_component(f: &RatMap, c: &Component, cfg: &NumConfig) -> Result<ExcComponent, BiratError> {
    let mut out = ExcComponent {
        kind: c.kind,
        exact: c.exact.clone(),
        numeric: c.numeric.clone(),
        mult: c.mult,
        contracted: false,
        image: None,
        image_exact: None,
    };
    match (c.kind, &c.exact) {
        (CompKind::Line, Some(l)) => {
            let r = f.restrict_to_exact_line(l)?;
            set_exact(&mut out, r.contracted, r.image);
        }
        (CompKind::Line, None) => {
            let r = f.restrict_to_numeric_line(&c.line_coeffs())?;
            out.contracted = r.contracted;
            out.image = r.image.and_then(CPoint::new);
        }
        (CompKind::Conic, Some(q)) => match exact_conic_param(q, cfg) {
            Some(param) => {
                let r = pullback_contraction(f.comps(), &param)?;
                set_exact(&mut out, r.contracted, r.image);
            }
            None => {
                let param = numeric_conic_param(&q.to_c(), cfg)?;
                let r = pullback_contraction(&f.numeric_comps(), &param)?;
                out.contracted = r.contracted;
                out.image = r.image.and_then(CPoint::new);
            }
        },
        (CompKind::Conic, None) => {
            let param = numeric_conic_param(&c.numeric, cfg)?;
            let r = pullback_contraction(&f.numeric_comps(), &param)?;
            out.contracted = r.contracted;
            out.image = r.image.and_then(CPoint::new);
        }
    }
    Ok(out)
}

fn set_exact(out: &mut ExcComponent, contracted: bool, image: Option<[GaussRat; 3]>) {
    out.contracted = contracted;
    if let Some(p) = image {
        out.image = Some(CPoint::from_exact(&p));
        out.image_exact = Some(crate::polycore::cpoint::normalize_exact(&p));
    }
}

fn conic_matrix<K: Scalar>(q: &Poly<K>) -> [[K; 3]; 3] {
    let half = K::one().over(&K::from_i64(2));
    [0, 1, 2].map(|i| {
        [0, 1, 2].map(|j| {
            let mut e = [0, 0, 0];
            e[i] += 1;
            e[j] += 1;
            let c = q.coeff(&e);
            if i == j {
                c
            } else {
                c.times(&half)
            }
        })
    })
}

/// Quadratic parametrization of a conic from one point p0 on it.
fn conic_param<K: Scalar>(q: &Poly<K>, p0: &[K; 3]) -> [Poly<K>; 3] {
    let a = conic_matrix(q);
    let e: [[K; 3]; 3] = [0, 1, 2].map(|i| [0, 1, 2].map(|j| if i == j { K::one() } else { K::zero() }));
    // two basis vectors completing p0
    let mut pair = (0, 1);
    'outer: for u in 0..3 {
        for w in u + 1..3 {
            let m: Matrix<K> = vec![p0.to_vec(), e[u].to_vec(), e[w].to_vec()];
            if !linalg::det(&m).negligible(1.0) {
                pair = (u, w);
                break 'outer;
            }
        }
    }
    let v = [0, 1, 2].map(|k| Poly::<K>::linear(&[e[pair.0][k].clone(), e[pair.1][k].clone(), K::zero()]));
    let mut vav = Poly::<K>::zero();
    let mut pav = Poly::<K>::zero();
    for i in 0..3 {
        for j in 0..3 {
            vav = &vav + &(&v[i] * &v[j]).scale_by(&a[i][j]);
            pav = &pav + &v[j].scale_by(&p0[i].times(&a[i][j]));
        }
    }
    let two = K::from_i64(2);
    [0, 1, 2].map(|k| &vav.scale_by(&p0[k]) - &(&pav * &v[k]).scale_by(&two))
}

fn exact_conic_param(q: &HPoly, cfg: &NumConfig) -> Option<[HPoly; 3]> {
    let p0 = exact_conic_point(q, cfg)?;
    Some(conic_param(q, &p0))
}

fn exact_conic_point(q: &HPoly, cfg: &NumConfig) -> Option<[GaussRat; 3]> {
    let g = GaussRat::from_int;
    for e in [[1, 0, 0], [0, 1, 0], [0, 0, 1]] {
        let p = e.map(g);
        if q.eval(&p).is_zero() {
            return Some(p);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xc0);
    for _ in 0..6 {
        let a = [0; 3].map(|_| g(rng.gen_range(-5..=5)));
        let b = [0; 3].map(|_| g(rng.gen_range(-5..=5)));
        let r = restrict_line(q, &a, &b);
        if r.degree() != Some(2) {
            continue;
        }
        let roots = complex_roots(r.to_c().coeffs(), cfg).ok()?;
        for root in roots {
            if let Some(s) = GaussRat::rationalize(root.z, cfg.rational_tol, cfg.max_den) {
                let p = [0, 1, 2].map(|v| &(&s * &a[v]) + &b[v]);
                if q.eval(&p).is_zero() {
                    return Some(p);
                }
            }
        }
    }
    None
}

fn numeric_conic_param(q: &CPoly, cfg: &NumConfig) -> Result<[CPoly; 3], BiratError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xc1);
    for _ in 0..6 {
        let a = [0; 3].map(|_| Complex64::new(rng.gen_range(-5..=5) as f64, 0.0));
        let b = [0; 3].map(|_| Complex64::new(rng.gen_range(-5..=5) as f64, 0.0));
        let g = [0, 1, 2].map(|v| CPoly::linear(&[a[v], b[v], Complex64::new(0.0, 0.0)]));
        let mut c = q.substitute(&g).binary_coeffs(0, 1);
        c.reverse();
        if c.len() != 3 || c[2].norm() < 1e-8 * q.scale() {
            continue;
        }
        let roots = complex_roots(&c, cfg)?;
        let s = roots[0].z;
        let p0 = [0, 1, 2].map(|v| s * a[v] + b[v]);
        return Ok(conic_param(q, &p0));
    }
    Err(BiratError::Poly(PolyError::Recovery("no point on conic".into())))
}

/// Components of det jac f with contraction data.
pub fn exc_components(f: &RatMap, cfg: &NumConfig) -> Result<Vec<ExcComponent>, BiratError> {
    let j = f.det_jacobian();
    if j.is_zero() {
        return Err(BiratError::Degenerate);
    }
    let comps = lines_and_conics(&j, cfg)?;
    comps.iter().map(|c| analyze_component(f, c, cfg)).collect()
}

#[derive(Clone, Debug)]
pub struct BirWitness {
    pub birational: bool,
    pub rank_m: usize,
    /// det jac is a union of lines all contracted.
    pub geometric: bool,
    pub components: Vec<ExcComponent>,
}

impl BirWitness {
    pub fn agree(&self) -> bool {
        self.birational == self.geometric
    }
}

pub fn is_birational_quadratic(q: &RatMap, cfg: &NumConfig) -> Result<BirWitness, BiratError> {
    let q = q.reduce();
    if q.degree() != 2 {
        return Err(BiratError::NotQuadratic(q.degree()));
    }
    if q.det_jacobian().is_zero() {
        return Err(BiratError::Degenerate);
    }
    let rank = rank_m(&q)?;
    let (geometric, components) = match exc_components(&q, cfg) {
        Ok(c) => {
            let ok = c.iter().all(|x| x.kind == CompKind::Line && x.contracted);
            (ok, c)
        }
        Err(BiratError::Poly(PolyError::Unfactorable(_))) => (false, Vec::new()),
        Err(e) => return Err(e),
    };
    Ok(BirWitness { birational: rank <= 7, rank_m: rank, geometric, components })
}

/// Q = (L x) x (L' x), so that L.Q = L'.Q = 0.
pub fn wedge_construct(l: &Mat3, lp: &Mat3) -> Result<RatMap, BiratError> {
    let u = [0, 1, 2].map(|i| HPoly::linear(&l[i]));
    let v = [0, 1, 2].map(|i| HPoly::linear(&lp[i]));
    let comp = |a: usize, b: usize| {
        let p = &u[a] * &v[b];
        let q = &u[b] * &v[a];
        p.checked_sub(&q).unwrap_or_else(|_| if p.is_zero() { -q } else { p })
    };
    let c = [comp(1, 2), comp(2, 0), comp(0, 1)];
    if c.iter().all(|p| p.is_zero()) {
        return Err(BiratError::ZeroWedge);
    }
    Ok(RatMap::from_comps(c)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Sigma(u8),
    NotBirational,
    Config(u8),
    Unmatched,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Sigma(k) => write!(f, "Sigma{}", k),
            Label::NotBirational => write!(f, "NOT_BIRATIONAL"),
            Label::Config(k) => write!(f, "{{{}}}", k),
            Label::Unmatched => write!(f, "UNMATCHED"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct IndPoint {
    pub point: CPoint,
    pub exact: Option<[GaussRat; 3]>,
    /// Vanishing order of a generic member of the net.
    pub order: u32,
    /// Intersection multiplicity of two generic members.
    pub multiplicity: usize,
    pub foliation_mult: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AncStatus {
    Holds,
    Fails,
    /// Some base point carries infinitely near points.
    Improper,
}

#[derive(Clone, Debug)]
pub struct IndReport {
    pub points: Vec<IndPoint>,
    pub sum_mu: u32,
    pub sum_mu2: u32,
    pub anc: AncStatus,
}

pub fn ind_points(f: &RatMap, cfg: &NumConfig) -> Result<IndReport, BiratError> {
    let f = f.reduce();
    let n = f.degree();
    let zeros = if n <= 1 { Vec::new() } else { common_zeros(f.comps(), cfg)? };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x1d);
    let combos: Vec<HPoly> = (0..3)
        .map(|_| {
            let mut acc = HPoly::zero();
            for p in f.comps() {
                let c = GaussRat::from_int(rng.gen_range(1..=13) * if rng.gen_bool(0.5) { 1 } else { -1 });
                acc = acc.checked_add(&p.scale_by(&c)).unwrap_or(acc);
            }
            acc
        })
        .collect();
    let mut points = Vec::new();
    for z in zeros {
        let order = combos
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| match &z.exact {
                Some(e) => vanishing_order_exact(c, e),
                None => vanishing_order_numeric(c, &z.point, 1e-6),
            })
            .min()
            .unwrap_or(0);
        points.push(IndPoint { point: z.point, exact: z.exact, order, multiplicity: z.multiplicity, foliation_mult: None });
    }
    let sum_mu: u32 = points.iter().map(|p| p.order).sum();
    let sum_mu2: u32 = points.iter().map(|p| p.order * p.order).sum();
    let proper = points.iter().all(|p| p.multiplicity as u32 == p.order * p.order);
    let anc = if !proper {
        AncStatus::Improper
    } else if n >= 1 && sum_mu == 3 * n - 3 && sum_mu2 == n * n - 1 {
        AncStatus::Holds
    } else {
        AncStatus::Fails
    };
    Ok(IndReport { points, sum_mu, sum_mu2, anc })
}

#[derive(Clone, Debug)]
pub struct ClassReport {
    pub degree: u32,
    pub label: Label,
    pub e: Option<usize>,
    pub rank_m: Option<usize>,
    pub ind: Vec<IndPoint>,
    pub exc: Vec<ExcComponent>,
    pub notes: Vec<String>,
}

/// Stratum of a quadratic map given as written, before reduction.
pub fn classify_quadratic(raw: &RatMap, cfg: &NumConfig) -> Result<ClassReport, BiratError> {
    if raw.degree() != 2 {
        return Err(BiratError::NotQuadratic(raw.degree()));
    }
    let q = raw.reduce();
    let e = relation_space(raw).dim;
    let mut rep = ClassReport { degree: q.degree(), label: Label::NotBirational, e: Some(e), rank_m: None, ind: Vec::new(), exc: Vec::new(), notes: Vec::new() };
    if q.degree() == 1 {
        rep.label = Label::Sigma(0);
        return Ok(rep);
    }
    if q.degree() == 0 {
        rep.notes.push("constant map".into());
        return Ok(rep);
    }
    rep.rank_m = Some(rank_m(&q)?);
    let w = match is_birational_quadratic(&q, cfg) {
        Ok(w) => w,
        Err(BiratError::Degenerate) => {
            rep.notes.push("degenerate: det jac vanishes identically".into());
            return Ok(rep);
        }
        Err(err) => return Err(err),
    };
    if !w.agree() {
        rep.notes.push("rank test and contraction test disagree".into());
    }
    rep.exc = w.components.clone();
    if !w.birational {
        return Ok(rep);
    }
    let ind = ind_points(&q, cfg)?;
    let k = ind.points.len() as u8;
    rep.ind = ind.points;
    let mut mults: Vec<usize> = rep.exc.iter().map(|c| c.mult).collect();
    mults.sort_unstable();
    let pattern = match mults.as_slice() {
        [1, 1, 1] => Some(3),
        [1, 2] => Some(2),
        [3] => Some(1),
        _ => None,
    };
    if pattern != Some(k) {
        rep.notes.push(format!("det jac multiplicity pattern {:?} differs from #Ind = {}", mults, k));
    }
    rep.label = Label::Sigma(k);
    Ok(rep)
}

/// Inverse of a birational map by solving g(f(x)) proportional to x for g of
/// the same degree.
pub fn inverse(f: &RatMap) -> Result<RatMap, BiratError> {
    let f = f.reduce();
    let d = f.degree();
    if d == 0 {
        return Err(BiratError::NotBirational);
    }
    let monos = monomials(d);
    let nm = monos.len();
    let powers: Vec<Vec<HPoly>> = (0..3)
        .map(|v| {
            let mut ps = vec![HPoly::one()];
            for k in 1..=d as usize {
                let nxt = &ps[k - 1] * &f.comps()[v];
                ps.push(nxt);
            }
            ps
        })
        .collect();
    let subs: Vec<HPoly> = monos
        .iter()
        .map(|e| &(&powers[0][e[0] as usize] * &powers[1][e[1] as usize]) * &powers[2][e[2] as usize])
        .collect();
    let out_monos = monomials(d * d + 1);
    let row_of = |e: &Mono| out_monos.iter().position(|m| m == e).unwrap();
    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    let mut m: Matrix<GaussRat> = vec![vec![GaussRat::zero(); 3 * nm]; 3 * out_monos.len()];
    for (pi, &(i, j)) in pairs.iter().enumerate() {
        let base = pi * out_monos.len();
        let mut xj = [0, 0, 0];
        xj[j] = 1;
        let mut xi = [0, 0, 0];
        xi[i] = 1;
        for (k, s) in subs.iter().enumerate() {
            for (e, c) in s.mul_mono(&xj).terms() {
                let r = base + row_of(e);
                m[r][i * nm + k] = &m[r][i * nm + k] + c;
            }
            for (e, c) in s.mul_mono(&xi).terms() {
                let r = base + row_of(e);
                m[r][j * nm + k] = &m[r][j * nm + k] - c;
            }
        }
    }
    let ns = linalg::nullspace(&m);
    if ns.len() != 1 {
        return Err(BiratError::NotBirational);
    }
    let v = &ns[0];
    let comps = [0, 1, 2].map(|i| HPoly::from_terms(monos.iter().enumerate().map(|(k, e)| (*e, v[i * nm + k].clone()))).unwrap());
    let g = RatMap::from_comps(comps)?;
    if f.compose(&g)? != RatMap::identity() {
        return Err(BiratError::NotBirational);
    }
    Ok(g)
}

/// A line given exactly when possible.
#[derive(Clone, Debug)]
pub struct LineRep {
    pub exact: Option<HPoly>,
    pub numeric: [Complex64; 3],
}

impl LineRep {
    fn from_exact(h: HPoly) -> LineRep {
        let h = h.monic();
        let numeric = [[1, 0, 0], [0, 1, 0], [0, 0, 1]].map(|e| h.coeff(&e).to_c64());
        LineRep { exact: Some(h), numeric }
    }

    fn same(&self, o: &LineRep) -> bool {
        let a = self.numeric;
        let b = o.numeric;
        (0..3).all(|i| (0..3).all(|j| (a[i] * b[j] - a[j] * b[i]).norm() < 1e-8))
    }
}

#[derive(Clone, Debug)]
pub struct InvariantLines {
    /// Value of a0 c1^2 + c0 c1 (b0 - a1) - b1 c0^2 for each coordinate
    /// permutation conjugate of A.
    pub condition: Vec<([usize; 3], GaussRat)>,
    pub condition_holds: bool,
    pub lines: Vec<LineRep>,
    /// Some pencil through a coordinate point is invariant line by line.
    pub invariant_pencil: bool,
}

pub const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Permutation matrix sending e_j to e_{p[j]}.
pub fn perm_matrix(p: &[usize; 3]) -> Mat3 {
    let mut m: Mat3 = [0; 3].map(|_| [0; 3].map(|_| GaussRat::zero()));
    for j in 0..3 {
        m[p[j]][j] = GaussRat::one();
    }
    m
}

fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    linalg::to_array3(&linalg::mat_mul(&linalg::from_array3(a), &linalg::from_array3(b)))
}

fn mat3_inv(a: &Mat3) -> Option<Mat3> {
    linalg::inverse(&linalg::from_array3(a)).map(|m| linalg::to_array3(&m))
}

fn cat_condition(a: &Mat3) -> GaussRat {
    let (a0, b0, c0) = (&a[0][0], &a[0][1], &a[0][2]);
    let (a1, b1, c1) = (&a[1][0], &a[1][1], &a[1][2]);
    let t1 = &(a0 * c1) * c1;
    let t2 = &(c0 * c1) * &(b0 - a1);
    let t3 = &(b1 * c0) * c0;
    &(&t1 + &t2) - &t3
}

/// Invariant lines of A o sigma, searched in the pencils through the three
/// coordinate points, together with the coefficient condition.
pub fn invariant_line_test(a: &Mat3, cfg: &NumConfig) -> Result<InvariantLines, BiratError> {
    let am = RatMap::linear(a)?;
    let f = am.compose(&RatMap::sigma())?;
    let mut condition = Vec::new();
    for p in PERMS.iter() {
        let pm = perm_matrix(p);
        let conj = mat3_mul(&mat3_inv(&pm).unwrap(), &mat3_mul(a, &pm));
        condition.push((*p, cat_condition(&conj)));
    }
    let condition_holds = condition.iter().any(|(_, v)| v.is_zero());
    let mut lines: Vec<LineRep> = Vec::new();
    let mut invariant_pencil = false;
    let push = |lines: &mut Vec<LineRep>, l: LineRep| {
        if !lines.iter().any(|o| o.same(&l)) {
            lines.push(l);
        }
    };
    for k in 0..3 {
        let (i, j) = match k {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        // x_i = 0 itself
        let xi = HPoly::var(i);
        if f.comps()[i].div_exact(&xi).is_some() && !is_contracted_exact(&f, &xi)? {
            push(&mut lines, LineRep::from_exact(xi.clone()));
        }
        // x_j = t x_i, parametrized by x_i = s, x_j = t s, x_k = u; variables (s, u, t)
        let s = MPoly::var(3, 0);
        let u = MPoly::var(3, 1);
        let t = MPoly::var(3, 2);
        let mut g = vec![MPoly::zero(3); 3];
        g[i] = s.clone();
        g[j] = &t * &s;
        g[k] = u.clone();
        let fi = MPoly::from_hpoly(&f.comps()[i], 3).substitute(&g);
        let fj = MPoly::from_hpoly(&f.comps()[j], 3).substitute(&g);
        let expr = &fj - &(&t * &fi);
        if expr.is_zero() {
            invariant_pencil = true;
            continue;
        }
        let mut h = UPoly::zero();
        let mut groups: std::collections::BTreeMap<(u32, u32), Vec<GaussRat>> = std::collections::BTreeMap::new();
        for (e, c) in expr.terms() {
            let v = groups.entry((e[0], e[1])).or_default();
            if v.len() <= e[2] as usize {
                v.resize(e[2] as usize + 1, GaussRat::zero());
            }
            v[e[2] as usize] = c.clone();
        }
        for (_, v) in groups {
            h = h.gcd(&UPoly::new(v));
        }
        if h.degree().unwrap_or(0) == 0 {
            continue;
        }
        for (sf, _) in h.squarefree() {
            let roots = complex_roots(sf.to_c().coeffs(), cfg)?;
            for r in roots {
                let exact_t = GaussRat::rationalize(r.z, cfg.rational_tol, cfg.max_den).filter(|v| sf.eval(v).is_zero());
                let cand = match exact_t {
                    Some(tv) => {
                        let l = &HPoly::var(j) - &HPoly::var(i).scale_by(&tv);
                        if is_contracted_exact(&f, &l)? {
                            continue;
                        }
                        LineRep::from_exact(l)
                    }
                    None => {
                        let mut c = [Complex64::new(0.0, 0.0); 3];
                        c[j] = Complex64::new(1.0, 0.0);
                        c[i] = -r.z;
                        let res = f.restrict_to_numeric_line(&c)?;
                        if res.contracted {
                            continue;
                        }
                        LineRep { exact: None, numeric: c }
                    }
                };
                push(&mut lines, cand);
            }
        }
    }
    Ok(InvariantLines { condition, condition_holds, lines, invariant_pencil })
}

fn is_contracted_exact(f: &RatMap, l: &HPoly) -> Result<bool, BiratError> {
    match f.restrict_to_exact_line(l) {
        Ok(c) => Ok(c.contracted),
        Err(MapError::LineInIndeterminacy) => Ok(true),
        Err(e) => Err(e.into()),
    }
}

/// Fixed points of f that are not indeterminacy points.
pub fn fixed_points(f: &RatMap, cfg: &NumConfig) -> Result<Vec<CommonZero>, BiratError> {
    let forms = cross_forms(f);
    let zeros = common_zeros(&forms, cfg)?;
    Ok(zeros
        .into_iter()
        .filter(|z| match &z.exact {
            Some(e) => f.eval_exact(e).is_some(),
            None => f.evaluate(&z.point, 1e-8).is_some(),
        })
        .collect())
}

/// (x1 f2 - x2 f1, x2 f0 - x0 f2, x0 f1 - x1 f0).
pub fn cross_forms(f: &RatMap) -> [HPoly; 3] {
    let x = |i| HPoly::var(i);
    let c = f.comps();
    let w = |a: usize, b: usize| {
        let p = &x(a) * &c[b];
        let q = &x(b) * &c[a];
        p.checked_sub(&q).unwrap_or_else(|_| if p.is_zero() { -q } else { p })
    };
    [w(1, 2), w(2, 0), w(0, 1)]
}

#[derive(Clone, Debug)]
pub struct NormalForm {
    /// (A0, A1, B0, B1, C0, C1).
    pub params: [GaussRat; 6],
    /// (A2, B2, C2) read off the conjugated map.
    pub tail: [GaussRat; 3],
    pub relations_hold: bool,
    pub conjugator: Mat3,
    pub map: RatMap,
}

fn aligned(a: &[GaussRat; 3], b: &[GaussRat; 3], c: &[GaussRat; 3]) -> bool {
    linalg::det(&vec![a.to_vec(), b.to_vec(), c.to_vec()]).is_zero()
}

/// Conjugates a map of type A sigma with four fixed points in general
/// position to the six-parameter normal form with fixed coordinate points.
pub fn normal_form_sigma3(q: &RatMap, cfg: &NumConfig) -> Result<NormalForm, BiratError> {
    let q = q.reduce();
    if q.degree() != 2 {
        return Err(BiratError::NotQuadratic(q.degree()));
    }
    let fixed = match fixed_points(&q, cfg) {
        Ok(f) => f,
        Err(BiratError::Poly(PolyError::PositiveDimensional)) => return Err(BiratError::FixedPoints("curve of fixed points".into())),
        Err(e) => return Err(e),
    };
    if fixed.len() != 4 {
        return Err(BiratError::FixedPoints(format!("{} fixed points instead of 4", fixed.len())));
    }
    let pts: Vec<[GaussRat; 3]> = fixed.iter().map(|z| z.exact.clone().ok_or(BiratError::NotExact)).collect::<Result<_, _>>()?;
    for a in 0..4 {
        for b in a + 1..4 {
            for c in b + 1..4 {
                if aligned(&pts[a], &pts[b], &pts[c]) {
                    return Err(BiratError::FixedPoints("three aligned fixed points".into()));
                }
            }
        }
    }
    // prefer coordinate points in their own slot so normal forms are kept
    let g = GaussRat::from_int;
    let unit = [[1, 0, 0], [0, 1, 0], [0, 0, 1]].map(|r| r.map(g));
    let mut chosen: Vec<usize> = Vec::new();
    for u in &unit {
        if let Some(k) = pts.iter().position(|p| same_point(p, u)) {
            chosen.push(k);
        }
    }
    if chosen.len() != 3 {
        chosen = vec![0, 1, 2];
    }
    let cols: Vec<[GaussRat; 3]> = chosen
        .iter()
        .enumerate()
        .map(|(slot, &k)| {
            let p = &pts[k];
            if same_point(p, &unit[slot]) {
                unit[slot].clone()
            } else {
                p.clone()
            }
        })
        .collect();
    let c: Mat3 = [0, 1, 2].map(|i| [0, 1, 2].map(|j| cols[j][i].clone()));
    let cm = RatMap::linear(&c)?;
    let cinv = RatMap::linear(&mat3_inv(&c).unwrap())?;
    let q1 = RatMap::compose_all(&[cinv, q.clone(), cm])?;
    let eta: Vec<GaussRat> = (0..3)
        .map(|i| {
            let mut e = [0, 0, 0];
            e[i] = 2;
            q1.comps()[i].coeff(&e)
        })
        .collect();
    if eta.iter().any(|x| x.is_zero()) {
        return Err(BiratError::FixedPoints("vanishing diagonal coefficient".into()));
    }
    let dmat: Mat3 = [0, 1, 2].map(|i| [0, 1, 2].map(|j| if i == j { eta[i].inv() } else { GaussRat::zero() }));
    let dm = RatMap::linear(&dmat)?;
    let dinv = RatMap::linear(&mat3_inv(&dmat).unwrap())?;
    let q2 = RatMap::compose_all(&[dinv, q1, dm])?;
    let lead = q2.comps()[0].coeff(&[2, 0, 0]);
    let co = |i: usize, e: Mono| &q2.comps()[i].coeff(&e) / &lead;
    let (a0, a1, a2) = (co(0, [0, 1, 1]), co(1, [0, 1, 1]), co(2, [0, 1, 1]));
    let (b0, b1, b2) = (co(0, [1, 0, 1]), co(1, [1, 0, 1]), co(2, [1, 0, 1]));
    let (c0, c1, c2) = (co(0, [1, 1, 0]), co(1, [1, 1, 0]), co(2, [1, 1, 0]));
    let den = &(&a1 * &b0) - &(&a0 * &b1);
    let relations_hold = !den.is_zero()
        && a2 == &(&b0 - &(&a0 * &c1)) / &den
        && b2 == &(&a1 - &(&b1 * &c0)) / &den
        && c2 == &(&GaussRat::one() - &(&c0 * &c1)) / &den;
    Ok(NormalForm {
        params: [a0, a1, b0, b1, c0, c1],
        tail: [a2, b2, c2],
        relations_hold,
        conjugator: mat3_mul(&c, &dmat),
        map: q2,
    })
}

#[derive(Clone, Debug)]
pub struct SigmaConjugate {
    pub degree: u32,
    /// A = P l R with permutations P, R and l = (x0 : a x0 + b x1 : c x0 + d x2).
    pub special_form: bool,
}

pub fn sigma_conjugate_degree(a: &Mat3) -> Result<SigmaConjugate, BiratError> {
    let am = RatMap::linear(a)?;
    let s = RatMap::sigma();
    let g = RatMap::compose_all(&[s.clone(), am, s])?;
    let mut special = false;
    for p in PERMS.iter() {
        for r in PERMS.iter() {
            let pinv = mat3_inv(&perm_matrix(p)).unwrap();
            let rinv = mat3_inv(&perm_matrix(r)).unwrap();
            let m = mat3_mul(&pinv, &mat3_mul(a, &rinv));
            let z = |i: usize, j: usize| m[i][j].is_zero();
            if !z(0, 0) && z(0, 1) && z(0, 2) && !z(1, 1) && z(1, 2) && z(2, 1) && !z(2, 2) {
                special = true;
            }
        }
    }
    Ok(SigmaConjugate { degree: g.degree(), special_form: special })
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

    fn diag(a: i64, b: i64, c: i64) -> Mat3 {
        [[g(a), g(0), g(0)], [g(0), g(b), g(0)], [g(0), g(0), g(c)]]
    }

    #[test]
    fn relation_dimensions() {
        let rs = relation_space(&RatMap::sigma());
        assert_eq!(rs.dim, 2);
        assert!(in_relation_span(&rs, &diag(-1, 1, 0)));
        assert!(in_relation_span(&rs, &diag(1, 0, -1)));
        let lin = RatMap::new([&x(0) * &x(0), &x(0) * &x(1), &x(0) * &x(2)]).unwrap();
        assert_eq!(relation_space(&lin).dim, 3);
        let sq = RatMap::from_comps([&x(0) * &x(0), &x(1) * &x(1), &x(2) * &x(2)]).unwrap();
        assert_eq!(relation_space(&sq).dim, 0);
    }

    #[test]
    fn m_ranks() {
        assert_eq!(rank_m(&RatMap::sigma()).unwrap(), 7);
        assert_eq!(rank_m(&RatMap::rho()).unwrap(), 7);
        let sq = RatMap::from_comps([&x(0) * &x(0), &x(1) * &x(1), &x(2) * &x(2)]).unwrap();
        assert_eq!(rank_m(&sq).unwrap(), 9);
    }

    #[test]
    fn birationality_witnesses() {
        let cfg = NumConfig::default();
        let w = is_birational_quadratic(&RatMap::sigma(), &cfg).unwrap();
        assert!(w.birational && w.geometric);
        assert_eq!(w.components.len(), 3);
        let sq = RatMap::from_comps([&x(0) * &x(0), &x(1) * &x(1), &x(2) * &x(2)]).unwrap();
        let w = is_birational_quadratic(&sq, &cfg).unwrap();
        assert!(!w.birational && !w.geometric);
        let conc = RatMap::from_comps([&x(0) * &x(0), &x(1) * &x(1), &(&x(0) - &x(1)) * &x(2)]).unwrap();
        let w = is_birational_quadratic(&conc, &cfg).unwrap();
        assert!(!w.birational && !w.geometric);
        let deg = RatMap::from_comps([&x(0) * &x(0), &x(1) * &x(1), &x(0) * &x(1)]).unwrap();
        assert_eq!(is_birational_quadratic(&deg, &cfg).unwrap_err(), BiratError::Degenerate);
    }

    #[test]
    fn strata() {
        let cfg = NumConfig::default();
        assert_eq!(classify_quadratic(&RatMap::sigma(), &cfg).unwrap().label, Label::Sigma(3));
        let r = classify_quadratic(&RatMap::rho(), &cfg).unwrap();
        assert_eq!(r.label, Label::Sigma(2));
        assert!(r.notes.is_empty(), "{:?}", r.notes);
        let t = classify_quadratic(&RatMap::tau(), &cfg).unwrap();
        assert_eq!(t.label, Label::Sigma(1));
        assert!(same_point(t.ind[0].exact.as_ref().unwrap(), &[g(0), g(0), g(1)]));
        let lin = RatMap::new([&x(0) * &x(0), &x(0) * &x(1), &x(0) * &x(2)]).unwrap();
        let l = classify_quadratic(&lin, &cfg).unwrap();
        assert_eq!(l.label, Label::Sigma(0));
        assert_eq!(l.e, Some(3));
    }

    #[test]
    fn wedges() {
        let q = wedge_construct(&diag(1, 1, 1), &diag(1, 2, 3)).unwrap();
        assert_eq!(classify_quadratic(&q, &NumConfig::default()).unwrap().label, Label::Sigma(3));
        let jordan = [[g(1), g(1), g(0)], [g(0), g(1), g(1)], [g(0), g(0), g(1)]];
        let q = wedge_construct(&diag(1, 1, 1), &jordan).unwrap();
        assert_eq!(classify_quadratic(&q, &NumConfig::default()).unwrap().label, Label::Sigma(1));
        assert_eq!(wedge_construct(&diag(1, 1, 1), &diag(2, 2, 2)).unwrap_err(), BiratError::ZeroWedge);
    }

    #[test]
    fn inverses() {
        assert_eq!(inverse(&RatMap::sigma()).unwrap(), RatMap::sigma());
        assert_eq!(inverse(&RatMap::rho()).unwrap(), RatMap::rho());
        let f = RatMap::from_comps([
            &(&x(0).scale_by(&g(2)) + &x(1)) * &x(2),
            (&x(1) * &(&x(0) + &x(2))).scale_by(&g(3)),
            &x(2) * &(&x(0) + &x(2)),
        ])
        .unwrap();
        let inv = inverse(&f).unwrap();
        assert_eq!(inv.degree(), 2);
        assert_eq!(f.compose(&inv).unwrap(), RatMap::identity());
        assert_eq!(inv.compose(&f).unwrap(), RatMap::identity());
    }

    #[test]
    fn invariant_lines_of_sigma() {
        let il = invariant_line_test(&diag(1, 1, 1), &NumConfig::default()).unwrap();
        assert!(il.condition_holds);
        assert_eq!(il.lines.len(), 6);
        let a = [[g(1), g(-1), g(1)], [g(2), g(-2), g(1)], [g(5), g(-4), g(0)]];
        let il = invariant_line_test(&a, &NumConfig::default()).unwrap();
        assert!(il.condition_holds);
        assert!(il.lines.iter().any(|l| l.exact == Some(&x(0) - &x(1))));
    }

    #[test]
    fn sigma_normal_form() {
        let nf = normal_form_sigma3(&RatMap::sigma(), &NumConfig::default()).unwrap();
        assert!(nf.relations_hold);
        let again = normal_form_sigma3(&nf.map, &NumConfig::default()).unwrap();
        assert_eq!(again.map, nf.map);
        assert_eq!(again.conjugator, diag(1, 1, 1));
    }

    #[test]
    fn sigma_conjugates() {
        let a = [[g(1), g(0), g(0)], [g(2), g(3), g(0)], [g(5), g(0), g(7)]];
        let r = sigma_conjugate_degree(&a).unwrap();
        assert!(r.degree <= 2 && r.special_form);
        let p = [[g(2), g(3), g(5)], [g(7), g(11), g(13)], [g(17), g(19), g(23)]];
        let r = sigma_conjugate_degree(&p).unwrap();
        assert_eq!(r.degree, 4);
        assert!(!r.special_form);
        assert_eq!(sigma_conjugate_degree(&diag(1, 1, 1)).unwrap().degree, 1);
    }
}
