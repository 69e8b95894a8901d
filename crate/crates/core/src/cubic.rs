//! Degree-3 birational maps: factoring the Jacobian determinant into lines
//! and a conic, the incidence configuration of the contracted curves, and
//! labels anchored on a corpus of canonical models.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::birat::{self, BiratError, ExcComponent, IndPoint, Label};
use crate::cli::{parse_map, InputError};
use crate::polycore::factor::{line_points, lines_and_conics, CompKind, Component};
use crate::polycore::{CPoint, CPoly, GaussRat, HPoly, NumConfig, PolyError};
use crate::ratmap::{MapError, RatMap};

pub const MODELS: &str = include_str!("../data/cubic_models.txt");
pub const IDENTITIES: &str = include_str!("../data/identities.txt");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CubicError {
    #[error("expected a map of degree 3, got degree {0}")]
    NotCubic(u32),
    #[error("Jacobian determinant vanishes identically")]
    Degenerate,
    #[error("Jacobian determinant has a residual factor of degree {0} > 2; the map is not birational")]
    Unfactorable(u32),
    #[error("not birational: {0}")]
    NotBirational(String),
    #[error("corpus line {0}: {1}")]
    Corpus(usize, String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Birat(#[from] BiratError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Input(#[from] InputError),
}

fn from_poly(e: PolyError) -> CubicError {
    match e {
        PolyError::Unfactorable(d) => CubicError::Unfactorable(d),
        e => CubicError::Poly(e),
    }
}

fn comp_degree(c: &Component) -> usize {
    match c.kind {
        CompKind::Line => 1,
        CompKind::Conic => 2,
    }
}

/// Lines and conics of det jac f with their multiplicities.
pub fn factor_jacobian_cubic(f: &RatMap, cfg: &NumConfig) -> Result<Vec<Component>, CubicError> {
    let f = f.reduce();
    if f.degree() != 3 {
        return Err(CubicError::NotCubic(f.degree()));
    }
    let j = f.det_jacobian();
    if j.is_zero() {
        return Err(CubicError::Degenerate);
    }
    let comps = lines_and_conics(&j, cfg).map_err(from_poly)?;
    let total: usize = comps.iter().map(|c| comp_degree(c) * c.mult).sum();
    if total != 6 {
        return Err(CubicError::Unfactorable((6 - total.min(6)) as u32));
    }
    if comps.iter().all(|c| c.exact.is_some()) {
        let mut prod = HPoly::one();
        for c in &comps {
            prod = &prod * &c.exact.as_ref().unwrap().pow(c.mult as u32);
        }
        debug_assert_eq!(prod.monic(), j.monic());
        if prod.monic() != j.monic() {
            return Err(CubicError::Poly(PolyError::Recovery("factor product differs from det jac".into())));
        }
    }
    Ok(comps)
}

/// A point onto which some components are contracted.
#[derive(Clone, Debug)]
pub struct ImagePoint {
    pub point: CPoint,
    pub exact: Option<[GaussRat; 3]>,
    pub sources: Vec<usize>,
}

/// A special point of the source plane: an intersection of components or
/// an indeterminacy point.
#[derive(Clone, Debug)]
pub struct SpecialPoint {
    pub point: CPoint,
    pub on: Vec<usize>,
    /// (order, multiplicity) when the point is indeterminate.
    pub ind: Option<(u32, usize)>,
}

#[derive(Clone, Debug)]
pub struct ExcConfiguration {
    pub components: Vec<ExcComponent>,
    pub points: Vec<SpecialPoint>,
    /// (line, conic) pairs meeting in a single point.
    pub tangencies: Vec<(usize, usize)>,
    /// Triples of line components through one point.
    pub concurrent: Vec<[usize; 3]>,
    pub images: Vec<ImagePoint>,
    /// Triples of indices into `images` that are collinear.
    pub aligned: Vec<[usize; 3]>,
    pub ind: Vec<IndPoint>,
    pub signature: String,
    pub label: Label,
}

impl ExcConfiguration {
    /// Four line components with no three through a point.
    pub fn has_four_general_lines(&self) -> bool {
        let lines: Vec<usize> = (0..self.components.len()).filter(|&i| self.components[i].kind == CompKind::Line).collect();
        let concurrent = |a: usize, b: usize, c: usize| self.concurrent.iter().any(|t| t.contains(&a) && t.contains(&b) && t.contains(&c));
        let n = lines.len();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for d in c + 1..n {
                        let q = [lines[a], lines[b], lines[c], lines[d]];
                        let any = (0..4).any(|skip| {
                            let t: Vec<usize> = (0..4).filter(|&k| k != skip).map(|k| q[k]).collect();
                            concurrent(t[0], t[1], t[2])
                        });
                        if !any {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }
}

const POINT_TOL: f64 = 1e-6;

fn on_component(c: &CPoly, p: &CPoint) -> bool {
    c.eval_c(&p.coords).norm() <= 1e-7 * c.scale()
}

fn cross(a: &[Complex64; 3], b: &[Complex64; 3]) -> [Complex64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn det3(a: &[Complex64; 3], b: &[Complex64; 3], c: &[Complex64; 3]) -> Complex64 {
    let x = cross(b, c);
    a[0] * x[0] + a[1] * x[1] + a[2] * x[2]
}

fn push_point(pts: &mut Vec<CPoint>, p: CPoint) {
    if !pts.iter().any(|q| q.dist(&p) < POINT_TOL) {
        pts.push(p);
    }
}

/// Exact test that a rational line meets a rational conic in one point.
fn tangent_exact(l: &HPoly, q: &HPoly) -> bool {
    let c = [[1, 0, 0], [0, 1, 0], [0, 0, 1]].map(|e| l.coeff(&e));
    let cross = |a: &[GaussRat; 3], b: &[GaussRat; 3]| {
        [&a[1] * &b[2] - &a[2] * &b[1], &a[2] * &b[0] - &a[0] * &b[2], &a[0] * &b[1] - &a[1] * &b[0]]
    };
    let e = [0, 1, 2].map(|k| {
        let mut v = [GaussRat::zero(), GaussRat::zero(), GaussRat::zero()];
        v[k] = GaussRat::one();
        cross(&c, &v)
    });
    let nz = |v: &[GaussRat; 3]| v.iter().any(|z| !z.is_zero());
    let mut span: Vec<&[GaussRat; 3]> = e.iter().filter(|v| nz(v)).collect();
    let u = span.remove(0);
    let Some(v) = span.into_iter().find(|v| nz(&cross(u, v))) else { return false };
    let w = [0, 1, 2].map(|k| &u[k] + &v[k]);
    let (c0, c2) = (q.eval(u), q.eval(v));
    let c1 = q.eval(&w) - &c0 - &c2;
    if c0.is_zero() && c1.is_zero() && c2.is_zero() {
        return false;
    }
    (&c1 * &c1 - &(&c0 * &c2) * &GaussRat::from_int(4)).is_zero()
}

/// Points of a line on a conic, and whether they coincide.
fn line_conic(l: &[Complex64; 3], q: &CPoly) -> (Vec<CPoint>, bool) {
    let (u, v) = line_points(l);
    let add = |a: &[Complex64; 3], b: &[Complex64; 3]| [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
    let c0 = q.eval_c(&u);
    let c2 = q.eval_c(&v);
    let c1 = q.eval_c(&add(&u, &v)) - c0 - c2;
    let size = c0.norm().max(c1.norm()).max(c2.norm());
    let at = |t: Complex64| [u[0] + t * v[0], u[1] + t * v[1], u[2] + t * v[2]];
    let mut out = Vec::new();
    if c2.norm() <= 1e-10 * size {
        out.extend(CPoint::new(v));
        if c1.norm() <= 1e-10 * size {
            return (out, true);
        }
        out.extend(CPoint::new(at(-c0 / c1)));
        return (out, false);
    }
    let disc = c1 * c1 - c0 * c2 * 4.0;
    let s = disc.sqrt();
    let r1 = (-c1 + s) / (c2 * 2.0);
    let r2 = (-c1 - s) / (c2 * 2.0);
    let tangent = disc.norm() <= 1e-8 * (c1.norm_sqr() + (c0 * c2).norm());
    out.extend(CPoint::new(at(r1)));
    if !tangent {
        out.extend(CPoint::new(at(r2)));
    }
    (out, tangent)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    comps: Vec<(u8, usize)>,
    points: Vec<(u32, u32, usize)>,
    tangent: Vec<(usize, usize)>,
    images: Vec<u32>,
    aligned: Vec<[u32; 3]>,
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let comps: Vec<String> = self.comps.iter().map(|(k, m)| format!("{}{}", if *k == 0 { 'L' } else { 'C' }, m)).collect();
        let points: Vec<String> = self
            .points
            .iter()
            .map(|(m, o, mu)| if *o > 0 { format!("{:x}:{}/{}", m, o, mu) } else { format!("{:x}", m) })
            .collect();
        let tangent: Vec<String> = self.tangent.iter().map(|(a, b)| format!("{}{}", a, b)).collect();
        let images: Vec<String> = self.images.iter().map(|m| format!("{:x}", m)).collect();
        let aligned: Vec<String> = self.aligned.iter().map(|t| format!("{:x}.{:x}.{:x}", t[0], t[1], t[2])).collect();
        write!(
            f,
            "comps={} pts={} tan={} img={} aln={}",
            comps.join(","),
            points.join(","),
            tangent.join(","),
            images.join(","),
            aligned.join(",")
        )
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

fn remap(mask: u32, perm: &[usize]) -> u32 {
    (0..perm.len()).filter(|&i| mask & (1 << i) != 0).fold(0, |acc, i| acc | (1 << perm[i]))
}

fn mask_of(ids: &[usize]) -> u32 {
    ids.iter().fold(0, |acc, i| acc | (1 << i))
}

/// Relabeling-invariant encoding of the configuration.
fn signature(exc: &[ExcComponent], points: &[SpecialPoint], tangencies: &[(usize, usize)], images: &[ImagePoint], aligned: &[[usize; 3]]) -> String {
    let n = exc.len();
    let mut best: Option<Key> = None;
    for perm in permutations(n) {
        let mut comps = vec![(0u8, 0usize); n];
        for (i, c) in exc.iter().enumerate() {
            comps[perm[i]] = (if c.kind == CompKind::Line { 0 } else { 1 }, c.mult);
        }
        if let Some(b) = &best {
            if comps > b.comps {
                continue;
            }
        }
        let mut pts: Vec<(u32, u32, usize)> = points
            .iter()
            .map(|p| {
                let (o, mu) = p.ind.unwrap_or((0, 0));
                (remap(mask_of(&p.on), &perm), o, mu)
            })
            .collect();
        pts.sort();
        let mut tangent: Vec<(usize, usize)> = tangencies.iter().map(|(l, c)| (perm[*l], perm[*c])).collect();
        tangent.sort();
        let img_masks: Vec<u32> = images.iter().map(|ip| remap(mask_of(&ip.sources), &perm)).collect();
        let mut imgs = img_masks.clone();
        imgs.sort();
        let mut aln: Vec<[u32; 3]> = aligned
            .iter()
            .map(|t| {
                let mut m = t.map(|k| img_masks[k]);
                m.sort();
                m
            })
            .collect();
        aln.sort();
        let key = Key { comps, points: pts, tangent, images: imgs, aligned: aln };
        if best.as_ref().is_none_or(|b| key < *b) {
            best = Some(key);
        }
    }
    best.map(|k| k.to_string()).unwrap_or_default()
}

/// Configuration of the contracted curves; the label is left `Unmatched`.
pub fn exc_configuration(f: &RatMap, cfg: &NumConfig) -> Result<ExcConfiguration, CubicError> {
    let f = f.reduce();
    let comps = factor_jacobian_cubic(&f, cfg)?;
    let exc: Vec<ExcComponent> = comps.iter().map(|c| birat::analyze_component(&f, c, cfg)).collect::<Result<_, _>>()?;
    if let Some(k) = exc.iter().position(|c| !c.contracted) {
        return Err(CubicError::NotBirational(format!("component {} of det jac is not contracted", k)));
    }
    if exc.iter().filter(|c| c.kind == CompKind::Conic).count() > 1 {
        return Err(CubicError::NotBirational("two conics in det jac".into()));
    }
    let ind = birat::ind_points(&f, cfg)?.points;

    let mut cand: Vec<CPoint> = ind.iter().map(|p| p.point).collect();
    let mut tangencies = Vec::new();
    for i in 0..exc.len() {
        for j in i + 1..exc.len() {
            match (exc[i].kind, exc[j].kind) {
                (CompKind::Line, CompKind::Line) => {
                    let p = cross(&line_coeffs(&exc[i]), &line_coeffs(&exc[j]));
                    if let Some(p) = CPoint::new(p) {
                        push_point(&mut cand, p);
                    }
                }
                (CompKind::Line, CompKind::Conic) | (CompKind::Conic, CompKind::Line) => {
                    let (l, q) = if exc[i].kind == CompKind::Line { (i, j) } else { (j, i) };
                    let (pts, near) = line_conic(&line_coeffs(&exc[l]), &exc[q].numeric);
                    let tangent = match (&exc[l].exact, &exc[q].exact) {
                        (Some(a), Some(b)) => tangent_exact(a, b),
                        _ => near,
                    };
                    for p in pts {
                        push_point(&mut cand, p);
                    }
                    if tangent {
                        tangencies.push((l, q));
                    }
                }
                _ => {}
            }
        }
    }
    let points: Vec<SpecialPoint> = cand
        .into_iter()
        .map(|p| {
            let on = (0..exc.len()).filter(|&k| on_component(&exc[k].numeric, &p)).collect();
            let ind = ind.iter().find(|q| q.point.dist(&p) < POINT_TOL).map(|q| (q.order, q.multiplicity));
            SpecialPoint { point: p, on, ind }
        })
        .collect();
    let mut concurrent = Vec::new();
    for p in &points {
        let lines: Vec<usize> = p.on.iter().copied().filter(|&k| exc[k].kind == CompKind::Line).collect();
        for a in 0..lines.len() {
            for b in a + 1..lines.len() {
                for c in b + 1..lines.len() {
                    concurrent.push([lines[a], lines[b], lines[c]]);
                }
            }
        }
    }
    let mut images: Vec<ImagePoint> = Vec::new();
    for (k, c) in exc.iter().enumerate() {
        let Some(p) = c.image else { continue };
        match images.iter_mut().find(|ip| ip.point.dist(&p) < POINT_TOL) {
            Some(ip) => ip.sources.push(k),
            None => images.push(ImagePoint { point: p, exact: c.image_exact.clone(), sources: vec![k] }),
        }
    }
    let mut aligned = Vec::new();
    for a in 0..images.len() {
        for b in a + 1..images.len() {
            for c in b + 1..images.len() {
                let d = det3(&images[a].point.coords, &images[b].point.coords, &images[c].point.coords);
                if d.norm() < 1e-8 {
                    aligned.push([a, b, c]);
                }
            }
        }
    }
    let signature = signature(&exc, &points, &tangencies, &images, &aligned);
    Ok(ExcConfiguration { components: exc, points, tangencies, concurrent, images, aligned, ind, signature, label: Label::Unmatched })
}

fn line_coeffs(c: &ExcComponent) -> [Complex64; 3] {
    [[1, 0, 0], [0, 1, 0], [0, 0, 1]].map(|e| c.numeric.coeff(&e))
}

/// One canonical model of the corpus.
#[derive(Clone, Debug)]
pub struct CorpusModel {
    pub line: usize,
    pub text: String,
    pub map: RatMap,
    pub label: Label,
    pub orbit_dim: Option<u32>,
    pub signature: String,
}

#[derive(Clone, Debug)]
pub struct CorpusIndex {
    pub models: Vec<CorpusModel>,
    table: BTreeMap<String, Label>,
    /// Signatures shared by models with different labels.
    pub conflicts: Vec<String>,
}

fn parse_label(s: &str) -> Option<Label> {
    let k: u8 = s.strip_prefix('{')?.strip_suffix('}')?.parse().ok()?;
    Some(Label::Config(k))
}

/// Parses corpus text: one map per line, then `# label={k} dim=n`.
pub fn parse_corpus(text: &str) -> Result<Vec<(usize, String, RatMap, Label, Option<u32>)>, CubicError> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (expr, meta) = line.split_once('#').ok_or_else(|| CubicError::Corpus(no + 1, "missing label field".into()))?;
        let mut label = None;
        let mut dim = None;
        for field in meta.split_whitespace() {
            if let Some(v) = field.strip_prefix("label=") {
                label = parse_label(v);
            } else if let Some(v) = field.strip_prefix("dim=") {
                dim = v.parse().ok();
            }
        }
        let label = label.ok_or_else(|| CubicError::Corpus(no + 1, "bad or missing label".into()))?;
        let map = parse_map(expr.trim()).map_err(|e| CubicError::Corpus(no + 1, e.to_string()))?;
        out.push((no + 1, expr.trim().to_string(), map, label, dim));
    }
    Ok(out)
}

impl CorpusIndex {
    pub fn build(text: &str, cfg: &NumConfig) -> Result<CorpusIndex, CubicError> {
        let entries = parse_corpus(text)?;
        let sigs: Vec<Result<String, CubicError>> = std::thread::scope(|s| {
            let handles: Vec<_> = entries.iter().map(|e| s.spawn(move || exc_configuration(&e.2, cfg).map(|c| c.signature))).collect();
            handles.into_iter().map(|h| h.join().expect("corpus worker panicked")).collect()
        });
        let mut models = Vec::new();
        for (e, sig) in entries.into_iter().zip(sigs) {
            let signature = sig.map_err(|err| CubicError::Corpus(e.0, err.to_string()))?;
            models.push(CorpusModel { line: e.0, text: e.1, map: e.2, label: e.3, orbit_dim: e.4, signature });
        }
        let mut table: BTreeMap<String, Label> = BTreeMap::new();
        let mut conflicts = Vec::new();
        for m in &models {
            match table.get(&m.signature) {
                Some(l) if *l != m.label => conflicts.push(m.signature.clone()),
                _ => {
                    table.insert(m.signature.clone(), m.label.clone());
                }
            }
        }
        for c in &conflicts {
            table.remove(c);
        }
        Ok(CorpusIndex { models, table, conflicts })
    }

    pub fn lookup(&self, signature: &str) -> Label {
        self.table.get(signature).cloned().unwrap_or(Label::Unmatched)
    }

    /// Distinct labels have distinct signatures.
    pub fn separated(&self) -> bool {
        self.conflicts.is_empty()
    }
}

/// Index over the built-in corpus with default numeric settings.
pub fn builtin_corpus() -> &'static CorpusIndex {
    static INDEX: OnceLock<CorpusIndex> = OnceLock::new();
    INDEX.get_or_init(|| CorpusIndex::build(MODELS, &NumConfig::default()).expect("built-in corpus is valid"))
}

/// Configuration and label of a cubic birational map.
pub fn classify_cubic_with(index: &CorpusIndex, f: &RatMap, cfg: &NumConfig) -> Result<ExcConfiguration, CubicError> {
    let mut c = exc_configuration(f, cfg)?;
    c.label = index.lookup(&c.signature);
    Ok(c)
}

pub fn classify_cubic(f: &RatMap, cfg: &NumConfig) -> Result<ExcConfiguration, CubicError> {
    classify_cubic_with(builtin_corpus(), f, cfg)
}

/// f o g = g o f = id after reduction.
pub fn verify_inverse_pair(f: &RatMap, g: &RatMap) -> bool {
    let (f, g) = (f.reduce(), g.reduce());
    let id = RatMap::identity();
    matches!(f.compose(&g), Ok(h) if h == id) && matches!(g.compose(&f), Ok(h) if h == id)
}

/// The composition of `factors`, leftmost applied last, equals `target`.
pub fn verify_noether_decomposition(target: &RatMap, factors: &[RatMap]) -> bool {
    match RatMap::compose_all(factors) {
        Ok(h) => h.reduce() == target.reduce(),
        Err(_) => false,
    }
}

/// (γδx0+βδx2 : α²x1 : αδx2) o ρ = ρ o (γx0+βx2 : δx1 : αx2).
pub fn rho_isotropy_holds(alpha: &GaussRat, beta: &GaussRat, gamma: &GaussRat, delta: &GaussRat) -> bool {
    let z = GaussRat::zero();
    let left = [[gamma * delta, z.clone(), beta * delta], [z.clone(), alpha * alpha, z.clone()], [z.clone(), z.clone(), alpha * delta]];
    let right = [[gamma.clone(), z.clone(), beta.clone()], [z.clone(), delta.clone(), z.clone()], [z.clone(), z.clone(), alpha.clone()]];
    let (Ok(l), Ok(r)) = (RatMap::linear(&left), RatMap::linear(&right)) else { return false };
    match RatMap::rho().compose(&r) {
        Ok(target) => verify_noether_decomposition(&target, &[l, RatMap::rho()]),
        Err(_) => false,
    }
}

/// Seeded nonzero parameter tuples (α, β, γ, δ) with small rational entries.
pub fn rho_isotropy_samples(seed: u64, n: usize) -> Vec<[GaussRat; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nz = |rng: &mut ChaCha8Rng| loop {
        let p: i64 = rng.gen_range(-9..=9);
        let q: i64 = rng.gen_range(1..=5);
        if p != 0 {
            return GaussRat::from_frac(p, q);
        }
    };
    (0..n).map(|_| [nz(&mut rng), GaussRat::from_frac(rng.gen_range(-9..=9), 1), nz(&mut rng), nz(&mut rng)]).collect()
}

#[derive(Clone, Debug)]
pub enum IdentityKind {
    Compose { target: RatMap, factors: Vec<RatMap> },
    Inverse { f: RatMap, g: RatMap },
}

#[derive(Clone, Debug)]
pub struct Identity {
    pub name: String,
    pub line: usize,
    pub kind: IdentityKind,
}

impl Identity {
    pub fn holds(&self) -> bool {
        match &self.kind {
            IdentityKind::Compose { target, factors } => verify_noether_decomposition(target, factors),
            IdentityKind::Inverse { f, g } => verify_inverse_pair(f, g),
        }
    }
}

/// Parses the identity corpus format.
pub fn parse_identities(text: &str) -> Result<Vec<Identity>, CubicError> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |m: &str| CubicError::Corpus(no + 1, m.to_string());
        let (head, body) = line.split_once('|').ok_or_else(|| err("missing '|'"))?;
        let mut head = head.split_whitespace();
        let kind = head.next().ok_or_else(|| err("missing kind"))?;
        let name = head.next().ok_or_else(|| err("missing name"))?.to_string();
        let maps = |s: &str| -> Result<Vec<RatMap>, CubicError> {
            s.split(';').map(|m| parse_map(m.trim()).map_err(|e| CubicError::Corpus(no + 1, e.to_string()))).collect()
        };
        let kind = match kind {
            "compose" => {
                let (t, fs) = body.split_once('=').ok_or_else(|| err("missing '='"))?;
                let target = parse_map(t.trim()).map_err(|e| CubicError::Corpus(no + 1, e.to_string()))?;
                IdentityKind::Compose { target, factors: maps(fs)? }
            }
            "inverse" => {
                let ms = maps(body)?;
                if ms.len() != 2 {
                    return Err(err("inverse needs two maps"));
                }
                IdentityKind::Inverse { f: ms[0].clone(), g: ms[1].clone() }
            }
            k => return Err(err(&format!("unknown kind '{}'", k))),
        };
        out.push(Identity { name, line: no + 1, kind });
    }
    Ok(out)
}

/// Checks every identity in parallel; returns (name, holds).
pub fn verify_identities(ids: &[Identity]) -> Vec<(String, bool)> {
    std::thread::scope(|s| {
        let handles: Vec<_> = ids.iter().map(|id| s.spawn(move || (id.name.clone(), id.holds()))).collect();
        handles.into_iter().map(|h| h.join().expect("identity worker panicked")).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> NumConfig {
        NumConfig::default()
    }

    fn m(s: &str) -> RatMap {
        parse_map(s).unwrap()
    }

    #[test]
    fn jacobian_factors() {
        let f = m("[x0^3 : x1^2*x2 : x0*x1*x2]");
        let mut got: Vec<(String, usize)> = factor_jacobian_cubic(&f, &cfg()).unwrap().iter().map(|c| (c.exact.clone().unwrap().to_string(), c.mult)).collect();
        got.sort();
        assert_eq!(got, vec![("x0".to_string(), 3), ("x1".to_string(), 2), ("x2".to_string(), 1)]);

        let f = m("[x0*(x0^2+x1*x2) : x1^3 : x1*(x0^2+x1*x2)]");
        let comps = factor_jacobian_cubic(&f, &cfg()).unwrap();
        assert!(comps.iter().any(|c| c.kind == CompKind::Conic && c.exact == Some(&(&HPoly::var(0) * &HPoly::var(0)) + &(&HPoly::var(1) * &HPoly::var(2)))));
        assert!(comps.iter().any(|c| c.kind == CompKind::Line && c.exact == Some(HPoly::var(1))));

        let f = m("[x0*x2^2+x1^3 : x1*x2^2 : x2^3]");
        let comps = factor_jacobian_cubic(&f, &cfg()).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!((comps[0].exact.clone().unwrap(), comps[0].mult), (HPoly::var(2), 6));
    }

    #[test]
    fn non_birational_cubic_is_refused() {
        let f = m("[x0^3 : x1^3 : x2^3]");
        assert!(matches!(classify_cubic(&f, &cfg()), Err(CubicError::NotBirational(_))));
    }

    #[test]
    fn corpus_is_separated_and_labels_reproduce() {
        let idx = builtin_corpus();
        assert_eq!(idx.models.len(), 32);
        assert!(idx.separated(), "conflicts: {:?}", idx.conflicts);
        for model in &idx.models {
            let c = classify_cubic(&model.map, &cfg()).unwrap();
            assert_eq!(c.label, model.label, "line {}", model.line);
            assert!(!c.has_four_general_lines());
        }
    }

    #[test]
    fn examples_from_the_classification() {
        assert_eq!(classify_cubic(&m("[x0^3 : x1^2*x2 : x0*x1*x2]"), &cfg()).unwrap().label, Label::Config(3));
        assert_eq!(classify_cubic(&m("[x0^3 : x0^2*x1 : (x0-x1)*x1*x2]"), &cfg()).unwrap().label, Label::Config(4));
        // gamma = 1, delta = 3: the lines of x0^2 + x0x1 + x1^2 are not rational
        let xi = m("[x0*(x0^2+x1^2+x0*x1+3*x0*x2+x1*x2) : x1*(x0^2+x1^2+x0*x1+3*x0*x2+x1*x2) : x0*x1*x2]");
        assert_eq!(classify_cubic(&xi, &cfg()).unwrap().label, Label::Config(15));
    }

    #[test]
    fn labels_survive_left_right_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rand_lin = |rng: &mut ChaCha8Rng| loop {
            let a = [0; 3].map(|_| [0; 3].map(|_| GaussRat::from_int(rng.gen_range(-3..=3))));
            if let Ok(l) = RatMap::linear(&a) {
                return l;
            }
        };
        for model in builtin_corpus().models.iter().step_by(3) {
            let a = rand_lin(&mut rng);
            let b = rand_lin(&mut rng);
            let g = RatMap::compose_all(&[a, model.map.clone(), b]).unwrap();
            let c = classify_cubic(&g, &cfg()).unwrap();
            assert_eq!(c.label, model.label, "model on line {}", model.line);
        }
    }

    #[test]
    fn sigma_a_sigma_contracts_conic_and_four_lines() {
        // with every other entry equal to 1 the first two rows coincide
        assert!(RatMap::linear_int([[0, 1, 1], [0, 1, 1], [2, 1, 1]]).is_err());
        let f = RatMap::compose_all(&[RatMap::sigma(), RatMap::linear_int([[0, 2, -1], [0, 3, 1], [2, 1, 5]]).unwrap(), RatMap::sigma()]).unwrap();
        assert_eq!(f.degree(), 3);
        let c = classify_cubic(&f, &cfg()).unwrap();
        assert_eq!(c.components.iter().filter(|k| k.kind == CompKind::Conic).count(), 1);
        assert_eq!(c.components.iter().filter(|k| k.kind == CompKind::Line).count(), 4);
        assert_eq!(c.label, Label::Config(15));
    }

    #[test]
    fn inverse_pairs() {
        assert!(verify_inverse_pair(&m("[x0*(x0^2+x1*x2) : x1^3 : x1*(x0^2+x1*x2)]"), &m("[x0*x1*x2 : x1*x2^2 : x2^3-x0^2*x1]")));
        assert!(verify_inverse_pair(&m("[x1^2*x2 : x0*(x0*x2+x1^2) : x1*(x0*x2+x1^2)]"), &m("[x1*(x2^2-x0*x1) : x2*(x2^2-x0*x1) : x0*x2^2]")));
        assert!(verify_inverse_pair(&RatMap::new(RatMap::sigma().comps().clone().map(|p| &p * &HPoly::var(0))).unwrap(), &RatMap::sigma()));
        assert!(!verify_inverse_pair(&RatMap::sigma(), &RatMap::rho()));
    }

    #[test]
    fn identity_corpus_holds() {
        let ids = parse_identities(IDENTITIES).unwrap();
        assert!(ids.len() >= 25);
        let failed: Vec<String> = verify_identities(&ids).into_iter().filter(|(_, ok)| !ok).map(|(n, _)| n).collect();
        assert!(failed.is_empty(), "failed: {:?}", failed);
    }

    #[test]
    fn rho_isotropy_family() {
        for t in rho_isotropy_samples(3, 5) {
            assert!(rho_isotropy_holds(&t[0], &t[1], &t[2], &t[3]));
        }
        let target = RatMap::rho().compose(&RatMap::linear_int([[2, 0, 1], [0, 5, 0], [0, 0, 1]]).unwrap()).unwrap();
        let wrong = RatMap::linear_int([[10, 0, 5], [0, 1, 0], [0, 0, 6]]).unwrap();
        assert!(!verify_noether_decomposition(&target, &[wrong, RatMap::rho()]));
    }
}
