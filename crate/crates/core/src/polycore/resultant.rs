use super::gauss::GaussRat;
use super::hpoly::HPoly;
use super::linalg;
use super::upoly::UPoly;
use super::PolyError;

/// Coefficients of `p` as a polynomial in x_v, each evaluated at the point
/// where the other two variables take values (a, b) in increasing index order.
fn fiber_coeffs(p: &HPoly, v: usize, a: &GaussRat, b: &GaussRat) -> Vec<GaussRat> {
    let (i, j) = others(v);
    let mut out = vec![GaussRat::zero(); p.degree_in(v) as usize + 1];
    for (e, c) in p.terms() {
        let t = &(c * &a.pow(e[i])) * &b.pow(e[j]);
        let k = e[v] as usize;
        out[k] = &out[k] + &t;
    }
    out
}

pub(crate) fn others(v: usize) -> (usize, usize) {
    match v {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Sylvester determinant of two coefficient lists (low to high) taken with
/// formal degrees m = len-1 and n = len-1.
pub fn sylvester_det(f: &[GaussRat], g: &[GaussRat]) -> GaussRat {
    let m = f.len() - 1;
    let n = g.len() - 1;
    let size = m + n;
    if size == 0 {
        return GaussRat::one();
    }
    let mut mat = vec![vec![GaussRat::zero(); size]; size];
    for r in 0..n {
        for (k, c) in f.iter().enumerate() {
            mat[r][r + m - k] = c.clone();
        }
    }
    for r in 0..m {
        for (k, c) in g.iter().enumerate() {
            mat[n + r][r + n - k] = c.clone();
        }
    }
    linalg::det(&mat)
}

/// Res_{x_v}(p, q) as a binary form in the two remaining variables, with
/// the formal degrees deg_{x_v} p and deg_{x_v} q.
pub fn resultant(p: &HPoly, q: &HPoly, v: usize) -> Result<HPoly, PolyError> {
    let m = p.degree_in(v) as usize;
    let n = q.degree_in(v) as usize;
    if p.is_zero() || q.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    if m == 0 || n == 0 {
        return Err(PolyError::VariableAbsent(v));
    }
    let dp = p.degree().unwrap() as usize;
    let dq = q.degree().unwrap() as usize;
    let d = n * dp + m * dq - m * n;
    let one = GaussRat::one();
    let ts: Vec<GaussRat> = (0..=d as i64).map(GaussRat::from_int).collect();
    let vals: Vec<GaussRat> = ts
        .iter()
        .map(|t| sylvester_det(&fiber_coeffs(p, v, &one, t), &fiber_coeffs(q, v, &one, t)))
        .collect();
    let u = UPoly::interpolate(&ts, &vals);
    let (i, j) = others(v);
    let mut terms = Vec::new();
    for (k, c) in u.coeffs().iter().enumerate() {
        let mut e = [0u32; 3];
        e[i] = (d - k) as u32;
        e[j] = k as u32;
        terms.push((e, c.clone()));
    }
    Ok(HPoly::from_terms(terms).expect("homogeneous by construction"))
}

/// Same as `resultant`, but reports a non-constant leading coefficient in
/// x_v, which makes the result miss common zeros at the point x_v = 1.
pub fn resultant_checked(p: &HPoly, q: &HPoly, v: usize) -> Result<HPoly, PolyError> {
    for f in [p, q] {
        if f.degree_in(v) != f.degree().unwrap_or(0) {
            return Err(PolyError::DegenerateLeading(v));
        }
    }
    resultant(p, q, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> HPoly {
        HPoly::var(i)
    }

    #[test]
    fn resultant_examples() {
        assert!(resultant(&(&x(1) * &x(2)), &(&x(0) * &x(2)), 2).unwrap().is_zero());
        let p = &(&x(0) * &x(2)) - &(&x(1) * &x(1));
        let q = &(&x(1) * &x(2)) - &(&x(0) * &x(0));
        let r = resultant(&p, &q, 2).unwrap();
        let expect = &x(1).pow(3) - &x(0).pow(3);
        assert!(r == expect || r == -expect.clone());
        let r = resultant(&(&x(2) - &x(0)), &(&x(2) - &x(1)), 2).unwrap();
        assert!(r == &x(1) - &x(0) || r == &x(0) - &x(1));
        assert!(resultant(&x(0), &x(2), 2).is_err());
        assert!(resultant_checked(&p, &q, 2).is_err());
    }
}
