//! Simultaneous root iteration with cluster merging.

use num_complex::Complex64;

use super::{NumConfig, PolyError};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub z: Complex64,
    pub mult: usize,
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a)
}

fn abs_horner(c: &[Complex64], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
}

fn deriv(c: &[Complex64]) -> Vec<Complex64> {
    c.iter().enumerate().skip(1).map(|(k, a)| a * k as f64).collect()
}

/// |p(z)| relative to sum |a_k| |z|^k.
pub fn normalized_residual(c: &[Complex64], z: Complex64) -> f64 {
    let s = abs_horner(c, z.norm());
    if s == 0.0 {
        return 0.0;
    }
    horner(c, z).norm() / s
}

/// Roots of the polynomial with coefficients `coeffs` (low to high), with
/// multiplicities summing to the degree.
pub fn complex_roots(coeffs: &[Complex64], cfg: &NumConfig) -> Result<Vec<Root>, PolyError> {
    let scale = coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(PolyError::ZeroPolynomial);
    }
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.last().is_some_and(|a| a.norm() == 0.0) {
        c.pop();
    }
    let zeros = c.iter().take_while(|a| a.norm() == 0.0).count();
    let c: Vec<Complex64> = c[zeros..].to_vec();
    let mut out = Vec::new();
    if zeros > 0 {
        out.push(Root { z: Complex64::new(0.0, 0.0), mult: zeros });
    }
    let n = c.len() - 1;
    if n == 0 {
        return Ok(out);
    }
    let approx = aberth(&c, cfg.max_iter)?;
    let merged = merge_clusters(&c, &approx, 1e-2, cfg.cluster);
    for r in &merged {
        if normalized_residual(&c, r.z) > cfg.residual {
            return Err(PolyError::NoConvergence(cfg.max_iter));
        }
    }
    out.extend(merged);
    Ok(out)
}

/// Plain list of approximations, one per root counted with multiplicity.
fn aberth(c: &[Complex64], max_iter: usize) -> Result<Vec<Complex64>, PolyError> {
    let n = c.len() - 1;
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|a| a / lead).collect();
    if n == 1 {
        return Ok(vec![-monic[0]]);
    }
    let dc = deriv(&monic);
    // Fujiwara-type bound for the initial circle
    let radius = (0..n)
        .map(|k| monic[k].norm().powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max)
        .max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius * 0.7, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();
    let mut done = vec![false; n];
    for _ in 0..max_iter {
        let mut moved = false;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let p = horner(&monic, z[i]);
            if p.norm() == 0.0 {
                done[i] = true;
                continue;
            }
            let dp = horner(&dc, z[i]);
            let ratio = p / dp;
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 0.0 {
                        sum += 1.0 / diff;
                    }
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if !step.re.is_finite() || !step.im.is_finite() {
                z[i] += Complex64::new(1e-8 * radius, 1e-8 * radius);
                moved = true;
                continue;
            }
            z[i] -= step;
            if step.norm() <= 4.0 * f64::EPSILON * z[i].norm().max(f64::MIN_POSITIVE) {
                done[i] = true;
            } else {
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    // Newton polish for isolated roots
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let p = horner(&monic, *zi);
            let dp = horner(&dc, *zi);
            if dp.norm() == 0.0 {
                break;
            }
            let nz = *zi - p / dp;
            if normalized_residual(&monic, nz) < normalized_residual(&monic, *zi) {
                *zi = nz;
            } else {
                break;
            }
        }
    }
    Ok(z)
}

/// Groups approximations by single linkage at `radius`; a group of k
/// approximations becomes one root of multiplicity k when the first k-1
/// derivatives nearly vanish at its centroid, otherwise the radius shrinks.
fn merge_clusters(c: &[Complex64], z: &[Complex64], radius: f64, thresh: f64) -> Vec<Root> {
    let n = z.len();
    let mut comp: Vec<usize> = (0..n).collect();
    fn find(comp: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while comp[r] != r {
            r = comp[r];
        }
        comp[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (z[i] - z[j]).norm() <= radius * z[i].norm().max(1.0) {
                let a = find(&mut comp, i);
                let b = find(&mut comp, j);
                comp[a] = b;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut label = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut comp, i);
        if label[r] == usize::MAX {
            label[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[label[r]].push(i);
    }
    let mut out = Vec::new();
    for g in groups {
        if g.len() == 1 {
            out.push(Root { z: z[g[0]], mult: 1 });
            continue;
        }
        let k = g.len();
        let centroid = refine_multiple(c, g.iter().map(|&i| z[i]).sum::<Complex64>() / k as f64, k);
        if cluster_ok(c, centroid, k, thresh) {
            out.push(Root { z: centroid, mult: k });
        } else if radius > 1e-12 {
            let sub: Vec<Complex64> = g.iter().map(|&i| z[i]).collect();
            out.extend(merge_clusters(c, &sub, radius * 0.1, thresh));
        } else {
            out.extend(g.iter().map(|&i| Root { z: z[i], mult: 1 }));
        }
    }
    out
}

/// Newton on the (k-1)-th derivative, which has a simple root at a root of
/// multiplicity k.
fn refine_multiple(c: &[Complex64], m: Complex64, k: usize) -> Complex64 {
    let mut d = c.to_vec();
    for _ in 0..k - 1 {
        d = deriv(&d);
    }
    let dd = deriv(&d);
    let mut m = m;
    for _ in 0..8 {
        let den = horner(&dd, m);
        if den.norm() == 0.0 {
            break;
        }
        let step = horner(&d, m) / den;
        if !step.re.is_finite() || !step.im.is_finite() || step.norm() > 1e-2 * m.norm().max(1.0) {
            break;
        }
        m -= step;
        if step.norm() <= f64::EPSILON * m.norm() {
            break;
        }
    }
    m
}

fn cluster_ok(c: &[Complex64], m: Complex64, k: usize, thresh: f64) -> bool {
    let mut d = c.to_vec();
    for _ in 0..k {
        if d.is_empty() {
            return false;
        }
        if normalized_residual(&d, m) > thresh {
            return false;
        }
        d = deriv(&d);
    }
    // the k-th derivative must not vanish as well
    d.is_empty() || normalized_residual(&d, m) > thresh
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn simple_examples() {
        let cfg = NumConfig::default();
        let mut r = complex_roots(&re(&[-1.0, 0.0, 1.0]), &cfg).unwrap();
        r.sort_by(|a, b| a.z.re.partial_cmp(&b.z.re).unwrap());
        assert_eq!(r.len(), 2);
        assert!((r[0].z + 1.0).norm() < 1e-12 && (r[1].z - 1.0).norm() < 1e-12);
        let r = complex_roots(&re(&[-8.0, 12.0, -6.0, 1.0]), &cfg).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].mult, 3);
        assert!((r[0].z - 2.0).norm() < 1e-8);
        let r = complex_roots(&re(&[-1.0, 0.0, 0.0, 1.0]), &cfg).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.iter().all(|x| (x.z.norm() - 1.0).abs() < 1e-10));
    }

    #[test]
    fn zero_roots_split_off() {
        let r = complex_roots(&re(&[0.0, 0.0, -4.0, 1.0]), &NumConfig::default()).unwrap();
        let total: usize = r.iter().map(|x| x.mult).sum();
        assert_eq!(total, 3);
        assert!(r.iter().any(|x| x.mult == 2 && x.z.norm() == 0.0));
    }
}
