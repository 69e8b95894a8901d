//! Iteration, degree growth, exceptional orbits, numeric orbits and escape
//! time rendering.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::birat::{self, BiratError};
use crate::polycore::cpoint::normalize_exact;
use crate::polycore::{CPoint, GaussRat, NumConfig};
use crate::ratmap::{MapError, RatMap};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynError {
    #[error("degree {0} exceeds the size cap")]
    SizeCap(u32),
    #[error("map has non-real coefficients")]
    NotReal,
    #[error("empty window")]
    EmptyWindow,
    #[error("dynamical degree is 1; the sum is not defined")]
    NotExpanding,
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Birat(#[from] BiratError),
}

/// Largest iterate degree computed before giving up.
pub const DEGREE_CAP: u32 = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct DegreeSequence {
    /// deg f^n for n = 1..
    pub degrees: Vec<u32>,
    /// First n with deg f^n < (deg f)^n.
    pub stable_horizon: Option<usize>,
    /// The sequence stopped early on the size cap.
    pub truncated: bool,
}

impl fmt::Display for DegreeSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.degrees.iter().enumerate() {
            writeln!(f, "{} {}", i + 1, d)?;
        }
        Ok(())
    }
}

pub fn degree_sequence(f: &RatMap, n: usize) -> Result<DegreeSequence, DynError> {
    let f = f.reduce();
    let d = f.degree();
    let mut acc = f.clone();
    let mut degrees = Vec::new();
    let mut truncated = false;
    for k in 1..=n {
        if k > 1 {
            if acc.degree() * d > DEGREE_CAP {
                truncated = true;
                break;
            }
            acc = f.compose(&acc)?;
        }
        degrees.push(acc.degree());
    }
    let stable_horizon = degrees
        .iter()
        .enumerate()
        .find(|(k, &dk)| (dk as u64) < (d as u64).saturating_pow(*k as u32 + 1))
        .map(|(k, _)| k + 1);
    Ok(DegreeSequence { degrees, stable_horizon, truncated })
}

#[derive(Clone, Debug)]
pub struct DegreeEstimate {
    /// (deg f^n)^(1/n) for each computed n.
    pub per_n: Vec<f64>,
    pub value: f64,
    pub monotone_nonincreasing: bool,
}

pub fn dynamical_degree_estimate(f: &RatMap, n: usize) -> Result<DegreeEstimate, DynError> {
    let seq = degree_sequence(f, n)?;
    let per_n: Vec<f64> = seq.degrees.iter().enumerate().map(|(k, &d)| (d as f64).powf(1.0 / (k + 1) as f64)).collect();
    let value = per_n.last().copied().unwrap_or(1.0);
    let monotone_nonincreasing = per_n.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    Ok(DegreeEstimate { per_n, value, monotone_nonincreasing })
}

#[derive(Clone, Debug)]
pub enum OrbitPoint {
    Exact([GaussRat; 3]),
    Numeric(CPoint),
}

impl OrbitPoint {
    pub fn to_cpoint(&self) -> CPoint {
        match self {
            OrbitPoint::Exact(e) => CPoint::from_exact(e),
            OrbitPoint::Numeric(p) => *p,
        }
    }
}

/// Forward orbit of the image of one contracted curve.
#[derive(Clone, Debug)]
pub struct CurveOrbit {
    pub curve: String,
    pub steps: Vec<OrbitPoint>,
    /// Smallest k with f^k(C) in Ind f.
    pub collision: Option<usize>,
}

/// Orbits f^k(f(C)) of the contracted curves C of f (or of its inverse),
/// stopping when one lands in Ind f.
pub fn exceptional_orbit(f: &RatMap, forward: bool, n: usize, cfg: &NumConfig) -> Result<Vec<CurveOrbit>, DynError> {
    let g = if forward { f.reduce() } else { birat::inverse(f)? };
    let comps = birat::exc_components(&g, cfg)?;
    let mut out = Vec::new();
    for c in comps.iter().filter(|c| c.contracted) {
        let curve = match &c.exact {
            Some(h) => h.to_string(),
            None => c.numeric.to_string(),
        };
        let mut steps = Vec::new();
        let mut collision = None;
        let mut cur = match (&c.image_exact, &c.image) {
            (Some(e), _) => Some(OrbitPoint::Exact(e.clone())),
            (None, Some(p)) => Some(OrbitPoint::Numeric(*p)),
            _ => None,
        };
        for k in 0..n {
            let Some(p) = cur.take() else { break };
            let next = match &p {
                OrbitPoint::Exact(e) => g.eval_exact(e).map(|v| OrbitPoint::Exact(normalize_exact(&v))),
                OrbitPoint::Numeric(q) => g.evaluate(q, 1e-8).map(OrbitPoint::Numeric),
            };
            steps.push(p);
            if next.is_none() {
                collision = Some(k);
                break;
            }
            cur = next;
        }
        out.push(CurveOrbit { curve, steps, collision });
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct BdPartial {
    pub lambda: f64,
    pub terms: Vec<f64>,
    pub sum: f64,
    /// Some orbit hit Ind f exactly.
    pub diverges: bool,
}

/// sum_{n <= N} lambda^-n |log dist(f^n(Ind f^-1), Ind f)| in the max-norm
/// chart metric.
pub fn bedford_diller_partial(f: &RatMap, n: usize, cfg: &NumConfig) -> Result<BdPartial, DynError> {
    let f = f.reduce();
    let est = dynamical_degree_estimate(&f, 4)?;
    let lambda = est.value;
    if lambda <= 1.0 + 1e-9 {
        return Err(DynError::NotExpanding);
    }
    let ind: Vec<CPoint> = birat::ind_points(&f, cfg)?.points.into_iter().map(|p| p.point).collect();
    let ginv = birat::inverse(&f)?;
    let sources: Vec<CPoint> = birat::ind_points(&ginv, cfg)?.points.into_iter().map(|p| p.point).collect();
    let mut terms = vec![0.0; n];
    let mut diverges = false;
    for s in sources {
        let mut p = s;
        for (k, t) in terms.iter_mut().enumerate() {
            let Some(q) = f.evaluate(&p, 1e-12) else {
                diverges = true;
                break;
            };
            p = q;
            let d = ind.iter().map(|m| m.dist(&p).min(p.dist(m))).fold(f64::INFINITY, f64::min);
            if d == 0.0 {
                diverges = true;
                break;
            }
            *t += lambda.powi(-(k as i32 + 1)) * d.ln().abs();
        }
    }
    let sum = if diverges { f64::INFINITY } else { terms.iter().sum() };
    Ok(BdPartial { lambda, terms, sum, diverges })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    MaxIter,
    HitIndeterminacy,
    Escaped,
    Cycle,
}

#[derive(Clone, Debug)]
pub struct OrbitTrace {
    pub points: Vec<OrbitPoint>,
    pub termination: Termination,
    /// (index of first repeated point, period).
    pub cycle: Option<(usize, usize)>,
}

fn chart_norm(c: &[Complex64; 3]) -> f64 {
    let z = c[2].norm();
    if z == 0.0 {
        return f64::INFINITY;
    }
    c[0].norm().max(c[1].norm()) / z
}

/// Numeric orbit with indeterminacy proximity 1e-10 and escape 1e12 in the
/// chart x2 = 1.
pub fn orbit(f: &RatMap, seed: &CPoint, n: usize) -> OrbitTrace {
    let f = f.reduce();
    let mut points = vec![OrbitPoint::Numeric(*seed)];
    let mut p = *seed;
    for _ in 0..n {
        let Some(q) = f.evaluate(&p, 1e-10) else {
            return OrbitTrace { points, termination: Termination::HitIndeterminacy, cycle: None };
        };
        if let Some(i) = points.iter().position(|o| o.to_cpoint().dist(&q) < 1e-9) {
            let period = points.len() - i;
            return OrbitTrace { points, termination: Termination::Cycle, cycle: Some((i, period)) };
        }
        points.push(OrbitPoint::Numeric(q));
        if chart_norm(&q.coords) > 1e12 {
            return OrbitTrace { points, termination: Termination::Escaped, cycle: None };
        }
        p = q;
    }
    OrbitTrace { points, termination: Termination::MaxIter, cycle: None }
}

/// Exact orbit with cycle detection by hashing normalized points.
pub fn orbit_exact(f: &RatMap, seed: &[GaussRat; 3], n: usize) -> OrbitTrace {
    let f = f.reduce();
    let start = normalize_exact(seed);
    let mut seen: HashMap<[GaussRat; 3], usize> = HashMap::new();
    seen.insert(start.clone(), 0);
    let mut points = vec![OrbitPoint::Exact(start.clone())];
    let mut p = start;
    for _ in 0..n {
        let Some(q) = f.eval_exact(&p) else {
            return OrbitTrace { points, termination: Termination::HitIndeterminacy, cycle: None };
        };
        let q = normalize_exact(&q);
        if let Some(&i) = seen.get(&q) {
            let period = points.len() - i;
            return OrbitTrace { points, termination: Termination::Cycle, cycle: Some((i, period)) };
        }
        seen.insert(q.clone(), points.len());
        points.push(OrbitPoint::Exact(q.clone()));
        p = q;
    }
    OrbitTrace { points, termination: Termination::MaxIter, cycle: None }
}

/// Real polynomial map flattened for fast evaluation.
#[derive(Clone, Debug)]
struct RealMap {
    comps: [Vec<(f64, [i32; 3])>; 3],
    scale: f64,
    degree: u32,
}

impl RealMap {
    fn new(f: &RatMap) -> Result<RealMap, DynError> {
        let mut scale: f64 = 0.0;
        let mut comps: [Vec<(f64, [i32; 3])>; 3] = Default::default();
        for (i, p) in f.comps().iter().enumerate() {
            for (e, c) in p.terms() {
                if !c.is_real() {
                    return Err(DynError::NotReal);
                }
                let v = c.to_c64().re;
                scale = scale.max(v.abs());
                comps[i].push((v, [e[0] as i32, e[1] as i32, e[2] as i32]));
            }
        }
        Ok(RealMap { comps, scale, degree: f.degree() })
    }

    fn eval(&self, p: &[f64; 3]) -> [f64; 3] {
        self.comps.clone().map(|c| c.iter().map(|(v, e)| v * p[0].powi(e[0]) * p[1].powi(e[1]) * p[2].powi(e[2])).sum())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RenderMode {
    Orbit,
    Escape,
}

#[derive(Clone, Debug)]
pub struct RenderParams {
    pub width: usize,
    pub height: usize,
    /// (x0 min, x0 max, x1 min, x1 max) in the chart x2 = 1.
    pub window: (f64, f64, f64, f64),
    pub mode: RenderMode,
    pub max_iter: usize,
    pub escape_radius: f64,
    /// Seeds per side of the grid in orbit mode.
    pub seeds: usize,
    pub seed: u64,
}

impl Default for RenderParams {
    fn default() -> Self {
        RenderParams {
            width: 256,
            height: 256,
            window: (-2.0, 2.0, -2.0, 2.0),
            mode: RenderMode::Escape,
            max_iter: 100,
            escape_radius: 1e6,
            seeds: 16,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<u8>,
}

impl Image {
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let k = 3 * (y * self.width + x);
        [self.rgb[k], self.rgb[k + 1], self.rgb[k + 2]]
    }

    /// Binary portable pixmap.
    pub fn to_p6(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.rgb);
        out
    }

    pub fn count(&self, color: [u8; 3]) -> usize {
        self.rgb.chunks(3).filter(|c| c == &color).count()
    }
}

pub const INTERIOR: [u8; 3] = [0, 0, 0];
pub const INDETERMINATE: [u8; 3] = [255, 255, 255];

/// Escape value n - log_d(ln |p| / ln 1e6), nearly independent of the radius.
fn smooth_value(n: usize, norm: f64, degree: u32) -> f64 {
    if degree < 2 {
        return n as f64;
    }
    let ratio = norm.ln() / 1e6f64.ln();
    n as f64 - ratio.ln() / (degree as f64).ln()
}

fn palette(v: f64) -> [u8; 3] {
    // quarter-unit bands keep colors stable under small shifts of v
    let band = (v * 4.0).floor() / 4.0;
    let t = band * 0.15;
    let c = |phase: f64| (127.5 * (1.0 + (std::f64::consts::TAU * (t + phase)).cos())).round().clamp(1.0, 254.0) as u8;
    [c(0.0), c(0.33), c(0.67)]
}

fn escape_pixel(m: &RealMap, x: f64, y: f64, params: &RenderParams) -> [u8; 3] {
    let mut p = [x, y, 1.0];
    for n in 0..params.max_iter {
        let q = m.eval(&p);
        let size = p.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let top = q.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if top <= 1e-10 * m.scale * size.powi(m.degree as i32) {
            return INDETERMINATE;
        }
        p = q.map(|v| v / top);
        let norm = if p[2] == 0.0 { f64::INFINITY } else { p[0].abs().max(p[1].abs()) / p[2].abs() };
        if norm > params.escape_radius {
            if !norm.is_finite() {
                return palette(n as f64);
            }
            return palette(smooth_value(n + 1, norm, m.degree));
        }
    }
    INTERIOR
}

/// Deterministic raster of a real map; pixels are computed independently.
pub fn render(f: &RatMap, params: &RenderParams) -> Result<Image, DynError> {
    let (x0, x1, y0, y1) = params.window;
    if params.width == 0 || params.height == 0 || x1 <= x0 || y1 <= y0 {
        return Err(DynError::EmptyWindow);
    }
    let m = RealMap::new(&f.reduce())?;
    match params.mode {
        RenderMode::Escape => Ok(render_escape(&m, params)),
        RenderMode::Orbit => Ok(render_orbit(&m, params)),
    }
}

fn pixel_center(params: &RenderParams, px: usize, py: usize) -> (f64, f64) {
    let (x0, x1, y0, y1) = params.window;
    let x = x0 + (px as f64 + 0.5) * (x1 - x0) / params.width as f64;
    let y = y1 - (py as f64 + 0.5) * (y1 - y0) / params.height as f64;
    (x, y)
}

fn render_escape(m: &RealMap, params: &RenderParams) -> Image {
    let (w, h) = (params.width, params.height);
    let mut rgb = vec![0u8; 3 * w * h];
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(h);
    let rows_per = h.div_ceil(threads);
    std::thread::scope(|s| {
        for (ci, chunk) in rgb.chunks_mut(3 * w * rows_per).enumerate() {
            s.spawn(move || {
                for (r, row) in chunk.chunks_mut(3 * w).enumerate() {
                    let py = ci * rows_per + r;
                    for px in 0..w {
                        let (x, y) = pixel_center(params, px, py);
                        row[3 * px..3 * px + 3].copy_from_slice(&escape_pixel(m, x, y, params));
                    }
                }
            });
        }
    });
    Image { width: w, height: h, rgb }
}

fn render_orbit(m: &RealMap, params: &RenderParams) -> Image {
    use rand::{Rng, SeedableRng};
    let (w, h) = (params.width, params.height);
    let (x0, x1, y0, y1) = params.window;
    let mut counts = vec![0u32; w * h];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(params.seed);
    let g = params.seeds.max(1);
    for i in 0..g {
        for j in 0..g {
            let jx: f64 = rng.gen_range(-0.25..0.25);
            let jy: f64 = rng.gen_range(-0.25..0.25);
            let mut p = [
                x0 + (i as f64 + 0.5 + jx) * (x1 - x0) / g as f64,
                y0 + (j as f64 + 0.5 + jy) * (y1 - y0) / g as f64,
                1.0,
            ];
            for _ in 0..=params.max_iter {
                if p[2] != 0.0 {
                    let (x, y) = (p[0] / p[2], p[1] / p[2]);
                    if x >= x0 && x < x1 && y > y0 && y <= y1 {
                        let px = ((x - x0) / (x1 - x0) * w as f64) as usize;
                        let py = ((y1 - y) / (y1 - y0) * h as f64) as usize;
                        counts[py.min(h - 1) * w + px.min(w - 1)] += 1;
                    }
                }
                let q = m.eval(&p);
                let top = q.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                if top == 0.0 || !top.is_finite() {
                    break;
                }
                p = q.map(|v| v / top);
            }
        }
    }
    let max = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let mut rgb = vec![0u8; 3 * w * h];
    for (k, &c) in counts.iter().enumerate() {
        if c > 0 {
            let v = (64.0 + 191.0 * (c as f64).ln_1p() / max.ln_1p()).round() as u8;
            rgb[3 * k..3 * k + 3].copy_from_slice(&[v, v, 255]);
        }
    }
    Image { width: w, height: h, rgb }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::HPoly;

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

    fn positive_a_sigma() -> RatMap {
        let a = RatMap::linear_int([[1, 2, 3], [4, 1, 2], [2, 5, 1]]).unwrap();
        a.compose(&RatMap::sigma()).unwrap()
    }

    #[test]
    fn degree_sequences() {
        assert_eq!(degree_sequence(&f23(), 7).unwrap().degrees, vec![2, 2, 3, 3, 4, 4, 5]);
        assert_eq!(degree_sequence(&f23(), 7).unwrap().stable_horizon, Some(2));
        let s = degree_sequence(&positive_a_sigma(), 4).unwrap();
        assert_eq!(s.degrees, vec![2, 4, 8, 16]);
        assert_eq!(s.stable_horizon, None);
        assert_eq!(degree_sequence(&RatMap::sigma(), 4).unwrap().degrees, vec![2, 1, 2, 1]);
        assert_eq!(dynamical_degree_estimate(&RatMap::identity(), 3).unwrap().value, 1.0);
        assert_eq!(dynamical_degree_estimate(&positive_a_sigma(), 4).unwrap().value, 2.0);
    }

    #[test]
    fn collisions_explain_degree_drops() {
        let cfg = NumConfig::default();
        let orbits = exceptional_orbit(&f23(), true, 5, &cfg).unwrap();
        assert!(orbits.iter().any(|o| o.collision == Some(0)));
        let orbits = exceptional_orbit(&positive_a_sigma(), true, 6, &cfg).unwrap();
        assert!(orbits.iter().all(|o| o.collision.is_none()));
    }

    #[test]
    fn bedford_diller_sums() {
        let cfg = NumConfig::default();
        let bd = bedford_diller_partial(&positive_a_sigma(), 12, &cfg).unwrap();
        assert!(!bd.diverges && bd.sum.is_finite());
        assert_eq!(bedford_diller_partial(&RatMap::sigma(), 5, &cfg).unwrap_err(), DynError::NotExpanding);
    }

    #[test]
    fn sigma_orbits() {
        let tr = orbit_exact(&RatMap::sigma(), &[g(2), g(3), g(1)], 10);
        assert_eq!(tr.termination, Termination::Cycle);
        assert_eq!(tr.cycle, Some((0, 2)));
        let tr = orbit(&RatMap::sigma(), &CPoint::real(2.0, 3.0, 1.0), 10);
        assert_eq!(tr.cycle, Some((0, 2)));
        let tr = orbit(&RatMap::sigma(), &CPoint::real(1.0, 1.0, 1.0), 10);
        assert_eq!(tr.cycle, Some((0, 1)));
        let tr = orbit(&RatMap::sigma(), &CPoint::real(1.0, 0.0, 0.0), 10);
        assert_eq!(tr.termination, Termination::HitIndeterminacy);
    }

    #[test]
    fn identity_orbit_render() {
        let p = RenderParams { mode: RenderMode::Orbit, width: 64, height: 64, seeds: 4, max_iter: 5, ..Default::default() };
        let img = render(&RatMap::identity(), &p).unwrap();
        assert_eq!(img.rgb.chunks(3).filter(|c| c != &INTERIOR).count(), 16);
        assert_eq!(render(&RatMap::identity(), &RenderParams { width: 0, ..Default::default() }).unwrap_err(), DynError::EmptyWindow);
    }
}
