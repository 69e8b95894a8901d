//! Splitting a plane curve into its line components and at most a residual
//! conic, enough for Jacobian determinants of quadratic and cubic maps.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gauss::GaussRat;
use super::gcd::{poly_gcd, restrict_line};
use super::hpoly::{CPoly, HPoly};
use super::roots::complex_roots;
use super::{NumConfig, PolyError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CompKind {
    Line,
    Conic,
}

#[derive(Clone, Debug)]
pub struct Component {
    pub kind: CompKind,
    pub exact: Option<HPoly>,
    pub numeric: CPoly,
    pub mult: usize,
}

impl Component {
    /// Coefficients (c0, c1, c2) of a line.
    pub fn line_coeffs(&self) -> [Complex64; 3] {
        [[1, 0, 0], [0, 1, 0], [0, 0, 1]].map(|e| self.numeric.coeff(&e))
    }
}

fn derivation(p: &HPoly, c: &[GaussRat; 3]) -> HPoly {
    let mut out = HPoly::zero();
    for (v, cv) in c.iter().enumerate() {
        let d = p.partial(v).scale_by(cv);
        out = out.checked_add(&d).unwrap_or(out);
    }
    out
}

/// Squarefree decomposition along a random directional derivative:
/// p = const * prod S_i^i.
pub fn squarefree_decomposition(p: &HPoly) -> Vec<(HPoly, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x59f);
    for _ in 0..8 {
        let c = [0; 3].map(|_| GaussRat::from_int(rng.gen_range(1..=9)));
        let out = yun(p, &c);
        let mut prod = HPoly::one();
        for (s, k) in &out {
            prod = &prod * &s.pow(*k as u32);
        }
        if prod.monic() == p.monic() {
            return out;
        }
    }
    vec![(p.monic(), 1)]
}

fn yun(f: &HPoly, c: &[GaussRat; 3]) -> Vec<(HPoly, usize)> {
    let mut out = Vec::new();
    if f.degree().unwrap_or(0) == 0 {
        return out;
    }
    let df = derivation(f, c);
    let g = poly_gcd(f, &df);
    let Some(mut b) = f.div_exact(&g) else { return out };
    let Some(mut cc) = df.div_exact(&g) else { return out };
    let mut d = &cc - &derivation(&b, c);
    let mut i = 1;
    while b.degree().unwrap_or(0) > 0 {
        let a = poly_gcd(&b, &d);
        if a.degree().unwrap_or(0) > 0 {
            out.push((a.monic(), i));
        }
        b = b.div_exact(&a).expect("gcd divides");
        cc = d.div_exact(&a).expect("gcd divides");
        let db = derivation(&b, c);
        d = if cc.is_zero() { -db } else if db.is_zero() { cc.clone() } else { &cc - &db };
        i += 1;
    }
    out
}

fn tangent_at(s: &HPoly, m: &[Complex64; 3]) -> [Complex64; 3] {
    let g = [0, 1, 2].map(|v| s.partial(v).eval_c(m));
    normalize3(g)
}

fn normalize3(g: [Complex64; 3]) -> [Complex64; 3] {
    let k = (0..3).max_by(|&a, &b| g[a].norm().partial_cmp(&g[b].norm()).unwrap()).unwrap();
    let p = g[k];
    let mut out = g.map(|z| z / p);
    out[k] = Complex64::new(1.0, 0.0);
    for z in out.iter_mut() {
        if z.norm() < 1e-13 {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    out
}

fn cross(a: &[Complex64; 3], b: &[Complex64; 3]) -> [Complex64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Two points spanning the line with coefficients `l`.
pub fn line_points(l: &[Complex64; 3]) -> ([Complex64; 3], [Complex64; 3]) {
    let e = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]].map(|r| r.map(|x| Complex64::new(x, 0.0)));
    let mut cands: Vec<[Complex64; 3]> = e.iter().map(|ek| cross(l, ek)).collect();
    cands.sort_by(|a, b| {
        let na: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
        nb.partial_cmp(&na).unwrap()
    });
    (cands[0], cands[1])
}

fn vanishes_on_line(s: &HPoly, l: &[Complex64; 3]) -> bool {
    let (u, v) = line_points(l);
    let deg = s.degree().unwrap_or(0) as usize;
    (0..=deg).all(|k| {
        let lam = Complex64::new(0.31 + 0.57 * k as f64, 0.13 * k as f64 - 0.2);
        let pt = [0, 1, 2].map(|i| u[i] + lam * v[i]);
        s.eval_c(&pt).norm() <= 1e-8 * s.eval_abs(&pt)
    })
}

fn rationalize_line(l: &[Complex64; 3], tol: f64, max_den: u64) -> Option<HPoly> {
    let c: Option<Vec<GaussRat>> = l.iter().map(|z| GaussRat::rationalize(*z, tol, max_den)).collect();
    let c = c?;
    Some(HPoly::linear(&[c[0].clone(), c[1].clone(), c[2].clone()]).monic())
}

/// Points where a random rational line meets the curve, taking the best
/// separated of a few candidate lines.
fn sample_points(s: &HPoly, deg: usize, cfg: &NumConfig, rng: &mut ChaCha8Rng) -> Result<Vec<[Complex64; 3]>, PolyError> {
    let mut best: Option<(f64, Vec<[Complex64; 3]>)> = None;
    for _ in 0..12 {
        let a = [0; 3].map(|_| GaussRat::from_int(rng.gen_range(-9..=9)));
        let b = [0; 3].map(|_| GaussRat::from_int(rng.gen_range(-9..=9)));
        let r = restrict_line(s, &a, &b);
        if r.degree() != Some(deg) || r.gcd(&r.derivative()).degree() != Some(0) {
            continue;
        }
        let Ok(roots) = complex_roots(r.to_c().coeffs(), cfg) else { continue };
        if roots.len() != deg {
            continue;
        }
        let mut sep = f64::INFINITY;
        for i in 0..deg {
            for j in i + 1..deg {
                let d = (roots[i].z - roots[j].z).norm() / (1.0 + roots[i].z.norm().max(roots[j].z.norm()));
                sep = sep.min(d);
            }
        }
        let pts = roots.iter().map(|t| [0, 1, 2].map(|v| t.z * a[v].to_c64() + b[v].to_c64())).collect();
        if best.as_ref().is_none_or(|(s0, _)| sep > *s0) {
            best = Some((sep, pts));
        }
        if sep > 1e-2 {
            break;
        }
    }
    best.map(|b| b.1).ok_or_else(|| PolyError::Recovery("no generic line for factoring".into()))
}

/// Rounds approximate line coefficients and keeps them if the line divides s.
fn exact_line(s: &HPoly, l: &[Complex64; 3], cfg: &NumConfig) -> Option<([Complex64; 3], HPoly)> {
    // exact divisibility decides, so a coarse second rounding is safe
    let h = [(cfg.rational_tol, cfg.max_den), (1e-6, 10_000)]
        .into_iter()
        .filter_map(|(tol, den)| rationalize_line(l, tol, den))
        .find(|h| s.div_exact(h).is_some())?;
    let c = h.to_c();
    Some((normalize3([[1, 0, 0], [0, 1, 0], [0, 0, 1]].map(|e| c.coeff(&e))), h))
}

/// Line components of a squarefree curve, then the residual of degree <= 2.
fn split_squarefree(s: &HPoly, mult: usize, cfg: &NumConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Component>, PolyError> {
    let deg = s.degree().unwrap_or(0);
    if deg == 0 {
        return Ok(Vec::new());
    }
    if deg == 1 {
        return Ok(vec![Component { kind: CompKind::Line, exact: Some(s.monic()), numeric: s.monic().to_c(), mult }]);
    }
    let pts = sample_points(s, deg as usize, cfg, rng)?;
    let other = sample_points(s, deg as usize, cfg, rng)?;
    let through = |l: &[Complex64; 3], m: &[Complex64; 3]| {
        let r = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        (l[0] * m[0] + l[1] * m[1] + l[2] * m[2]).norm() <= 1e-6 * r
    };
    let mut lines: Vec<([Complex64; 3], Option<HPoly>)> = Vec::new();
    let add_line = |lines: &mut Vec<([Complex64; 3], Option<HPoly>)>, l: [Complex64; 3], exact: Option<HPoly>| {
        if !lines.iter().any(|(o, _)| (0..3).all(|i| (o[i] - l[i]).norm() < 1e-7)) {
            lines.push((l, exact));
        }
    };
    for m in &pts {
        let l = tangent_at(s, m);
        match exact_line(s, &l, cfg) {
            Some((l, h)) => add_line(&mut lines, l, Some(h)),
            // an irrational line must also cross the second sample line on the curve
            None if vanishes_on_line(s, &l) && other.iter().any(|n| through(&l, n)) => add_line(&mut lines, l, None),
            None => {}
        }
    }
    // near a crossing the gradient is small and the tangent poorly
    // conditioned; retry with lines through roots on both sample lines
    let on_found = |lines: &Vec<([Complex64; 3], Option<HPoly>)>, m: &[Complex64; 3]| lines.iter().any(|(l, _)| through(l, m));
    let missing: Vec<[Complex64; 3]> = pts.iter().filter(|m| !on_found(&lines, m)).copied().collect();
    if missing.len() > 2 {
        for m in &missing {
            if on_found(&lines, m) {
                continue;
            }
            for n in other.iter().filter(|n| !on_found(&lines, n)) {
                if let Some((l, h)) = exact_line(s, &normalize3(cross(m, n)), cfg) {
                    add_line(&mut lines, l, Some(h));
                    break;
                }
            }
        }
    }
    let mut out = Vec::new();
    let all_exact = lines.iter().all(|(_, e)| e.is_some());
    let mut rest_exact = s.clone();
    let mut rest_num = s.to_c();
    for (l, e) in &lines {
        let numeric = match e {
            Some(h) => h.to_c(),
            None => CPoly::linear(l),
        };
        if all_exact {
            rest_exact = rest_exact.div_exact(e.as_ref().unwrap()).expect("checked divisibility");
        }
        let (q, _) = rest_num.div_rem(&numeric);
        rest_num = q.cleaned();
        out.push(Component { kind: CompKind::Line, exact: e.clone(), numeric, mult });
    }
    let rest_deg = if all_exact { rest_exact.degree().unwrap_or(0) } else { rest_num.degree().unwrap_or(0) };
    match rest_deg {
        0 => {}
        2 => {
            if all_exact {
                let c = rest_exact.monic();
                out.push(Component { kind: CompKind::Conic, numeric: c.to_c(), exact: Some(c), mult });
            } else {
                out.push(Component { kind: CompKind::Conic, numeric: rest_num.monic(), exact: None, mult });
            }
        }
        d => return Err(PolyError::Unfactorable(d)),
    }
    Ok(out)
}

/// Lines and conics of the curve p = 0 with multiplicities.
pub fn lines_and_conics(p: &HPoly, cfg: &NumConfig) -> Result<Vec<Component>, PolyError> {
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xfac7);
    let mut out = Vec::new();
    for (s, k) in squarefree_decomposition(p) {
        out.extend(split_squarefree(&s, k, cfg, &mut rng)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> HPoly {
        HPoly::var(i)
    }

    #[test]
    fn monomial_curve() {
        let p = &(&x(0).pow(3) * &x(1).pow(2)) * &x(2);
        let mut comps = lines_and_conics(&p, &NumConfig::default()).unwrap();
        comps.sort_by_key(|c| c.mult);
        let got: Vec<(usize, HPoly)> = comps.iter().map(|c| (c.mult, c.exact.clone().unwrap())).collect();
        assert_eq!(got, vec![(1, x(2)), (2, x(1)), (3, x(0))]);
    }

    #[test]
    fn conic_and_lines() {
        let conic = &(&x(0) * &x(0)) + &(&x(1) * &x(2));
        let p = &(&conic * &conic) * &(&x(1).pow(2) * &(&x(0) - &x(2)));
        let comps = lines_and_conics(&p, &NumConfig::default()).unwrap();
        assert_eq!(comps.len(), 3);
        assert!(comps.iter().any(|c| c.kind == CompKind::Conic && c.mult == 2 && c.exact == Some(conic.clone())));
        assert!(comps.iter().any(|c| c.kind == CompKind::Line && c.mult == 2 && c.exact == Some(x(1))));
    }

    #[test]
    fn irrational_lines_stay_numeric() {
        // x0^2 - 2 x1^2 splits over R but not over Q(i)
        let p = &(&(&x(0) * &x(0)) - &(&x(1) * &x(1)).scale_by(&GaussRat::from_int(2))) * &x(2);
        let comps = lines_and_conics(&p, &NumConfig::default()).unwrap();
        assert_eq!(comps.len(), 3);
        assert_eq!(comps.iter().filter(|c| c.exact.is_none()).count(), 2);
    }
}
