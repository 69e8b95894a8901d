use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gauss::GaussRat;
use super::hpoly::HPoly;
use super::upoly::UPoly;

type BPoly = Vec<UPoly<GaussRat>>;

/// Monic gcd of two homogeneous polynomials.
pub fn poly_gcd(p: &HPoly, q: &HPoly) -> HPoly {
    if p.is_zero() {
        return q.monic();
    }
    if q.is_zero() {
        return p.monic();
    }
    if p.is_constant() || q.is_constant() {
        return HPoly::one();
    }
    if coprime_on_line(p, q) {
        return HPoly::one();
    }
    let k = p.var_order(0).min(q.var_order(0));
    let pp = strip_x0(p);
    let qq = strip_x0(q);
    let g = bivariate_gcd(&dehomogenize(&pp), &dehomogenize(&qq));
    let gh = homogenize(&g).mul_mono(&[k, 0, 0]);
    gh.monic()
}

pub fn gcd_many<'a>(ps: impl IntoIterator<Item = &'a HPoly>) -> HPoly {
    let mut g = HPoly::zero();
    for p in ps {
        g = poly_gcd(&g, p);
        if g.is_constant() {
            return HPoly::one();
        }
    }
    g
}

/// Binary form p(s*P + t*Q) as a polynomial in s with t = 1, i.e. the
/// coefficient k multiplies s^k.
pub fn restrict_line(p: &HPoly, a: &[GaussRat; 3], b: &[GaussRat; 3]) -> UPoly<GaussRat> {
    let g = [0, 1, 2].map(|v| HPoly::linear(&[a[v].clone(), b[v].clone(), GaussRat::zero()]));
    let r = p.substitute(&g);
    // coefficient k of x0^(D-k) x1^k belongs to s^(D-k)
    let mut c = r.binary_coeffs(0, 1);
    c.reverse();
    UPoly::new(c)
}

/// Sound sufficient test for coprimality: restrictions to one exact line
/// keep full degree and share no root.
fn coprime_on_line(p: &HPoly, q: &HPoly) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6cd);
    for _ in 0..2 {
        let a = [0; 3].map(|_| GaussRat::from_int(rng.gen_range(-7..=7)));
        let b = [0; 3].map(|_| GaussRat::from_int(rng.gen_range(-7..=7)));
        let rp = restrict_line(p, &a, &b);
        let rq = restrict_line(q, &a, &b);
        if rp.degree() != p.degree().map(|d| d as usize) || rq.degree() != q.degree().map(|d| d as usize) {
            continue;
        }
        return rp.gcd(&rq).degree() == Some(0);
    }
    false
}

fn strip_x0(p: &HPoly) -> HPoly {
    let k = p.var_order(0);
    if k == 0 {
        return p.clone();
    }
    HPoly::from_terms(p.terms().map(|(e, c)| ([e[0] - k, e[1], e[2]], c.clone()))).unwrap()
}

fn dehomogenize(p: &HPoly) -> BPoly {
    let d2 = p.degree_in(2) as usize;
    let d1 = p.degree_in(1) as usize;
    let mut rows = vec![vec![GaussRat::zero(); d1 + 1]; d2 + 1];
    for (e, c) in p.terms() {
        rows[e[2] as usize][e[1] as usize] = c.clone();
    }
    rows.into_iter().map(UPoly::new).collect()
}

fn homogenize(b: &BPoly) -> HPoly {
    let mut d = 0;
    for (j, u) in b.iter().enumerate() {
        if let Some(k) = u.degree() {
            d = d.max(j + k);
        }
    }
    let mut terms = Vec::new();
    for (j, u) in b.iter().enumerate() {
        for (i, c) in u.coeffs().iter().enumerate() {
            if !c.is_zero() {
                terms.push(([(d - i - j) as u32, i as u32, j as u32], c.clone()));
            }
        }
    }
    HPoly::from_terms(terms).unwrap()
}

fn trim(b: &mut BPoly) {
    while b.last().is_some_and(|u| u.is_zero()) {
        b.pop();
    }
}

fn content(b: &BPoly) -> UPoly<GaussRat> {
    let mut g = UPoly::zero();
    for u in b {
        g = g.gcd(u);
        if g.degree() == Some(0) {
            break;
        }
    }
    g
}

fn primitive(b: &BPoly) -> (UPoly<GaussRat>, BPoly) {
    let c = content(b);
    let p = b.iter().map(|u| if u.is_zero() { u.clone() } else { u.div_exact(&c).expect("content divides") }).collect();
    (c, p)
}

fn prem(a: &BPoly, b: &BPoly) -> BPoly {
    let n = b.len() - 1;
    let lc = b[n].clone();
    let mut r = a.clone();
    trim(&mut r);
    while r.len() > n {
        let m = r.len() - 1;
        let top = r[m].clone();
        for x in r.iter_mut() {
            *x = x.mul(&lc);
        }
        for (j, bj) in b.iter().enumerate() {
            let k = m - n + j;
            r[k] = r[k].sub(&bj.mul(&top));
        }
        trim(&mut r);
    }
    r
}

fn bivariate_gcd(a: &BPoly, b: &BPoly) -> BPoly {
    let (ca, mut pa) = primitive(a);
    let (cb, mut pb) = primitive(b);
    let c = ca.gcd(&cb);
    trim(&mut pa);
    trim(&mut pb);
    if pa.len() < pb.len() {
        std::mem::swap(&mut pa, &mut pb);
    }
    while pb.len() > 1 {
        let r = prem(&pa, &pb);
        pa = pb;
        if r.is_empty() {
            pb = Vec::new();
            break;
        }
        pb = primitive(&r).1;
    }
    let g = if pb.is_empty() { pa } else { vec![UPoly::one()] };
    let g = if g.len() == 1 { vec![UPoly::one()] } else { primitive(&g).1 };
    g.iter().map(|u| u.mul(&c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> HPoly {
        HPoly::var(i)
    }

    #[test]
    fn gcd_examples() {
        let m = &(&x(0) * &x(1)) * &x(2);
        assert_eq!(poly_gcd(&(&m * &x(0)), &(&m * &x(1))), m);
        let a = &(&x(0) * &x(0)) - &(&x(1) * &x(1));
        assert_eq!(poly_gcd(&a, &(&x(0) + &x(1))), &x(0) + &x(1));
        let s = [&x(1) * &x(2), &x(0) * &x(2), &x(0) * &x(1)];
        assert!(gcd_many(s.iter()).is_constant());
    }

    #[test]
    fn gcd_with_x0_powers_and_conics() {
        let c = &(&x(0) * &x(2)) - &(&x(1) * &x(1));
        let p = &(&c * &x(0)) * &x(0);
        let q = &(&c * &x(0)) * &(&x(1) + &x(2));
        assert_eq!(poly_gcd(&p, &q), (&c * &x(0)).monic());
    }
}
