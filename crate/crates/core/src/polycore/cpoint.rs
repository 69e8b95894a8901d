use std::fmt;

use num_complex::Complex64;

use super::gauss::GaussRat;

/// Numeric point of P^2 scaled so its largest coordinate is 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CPoint {
    pub coords: [Complex64; 3],
}

impl CPoint {
    /// Normalizes; `None` for the zero vector.
    pub fn new(c: [Complex64; 3]) -> Option<CPoint> {
        let k = max_index(&c);
        if c[k].norm() == 0.0 || !c.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return None;
        }
        let p = c[k];
        let mut out = [c[0] / p, c[1] / p, c[2] / p];
        out[k] = Complex64::new(1.0, 0.0);
        Some(CPoint { coords: out })
    }

    pub fn real(a: f64, b: f64, c: f64) -> CPoint {
        CPoint::new([Complex64::new(a, 0.0), Complex64::new(b, 0.0), Complex64::new(c, 0.0)]).expect("nonzero point")
    }

    pub fn from_exact(e: &[GaussRat; 3]) -> CPoint {
        CPoint::new([e[0].to_c64(), e[1].to_c64(), e[2].to_c64()]).expect("nonzero point")
    }

    /// Projective distance: max-norm difference after normalization.
    pub fn dist(&self, o: &CPoint) -> f64 {
        let k = max_index(&self.coords);
        let a = self.coords;
        if o.coords[k].norm() < 1e-300 {
            return 1.0;
        }
        let s = o.coords[k];
        (0..3).map(|i| (a[i] - o.coords[i] / s).norm()).fold(0.0, f64::max)
    }

    pub fn max_index(&self) -> usize {
        max_index(&self.coords)
    }
}

fn max_index(c: &[Complex64; 3]) -> usize {
    let mut k = 0;
    for i in 1..3 {
        if c[i].norm() > c[k].norm() * (1.0 + 1e-12) {
            k = i;
        }
    }
    k
}

/// Scales an exact point so the coordinate picked by `CPoint` becomes 1.
pub fn normalize_exact(e: &[GaussRat; 3]) -> [GaussRat; 3] {
    let c = [e[0].to_c64(), e[1].to_c64(), e[2].to_c64()];
    let k = max_index(&c);
    let p = e[k].clone();
    [&e[0] / &p, &e[1] / &p, &e[2] / &p]
}

/// Projective equality of exact points.
pub fn same_point(a: &[GaussRat; 3], b: &[GaussRat; 3]) -> bool {
    (0..3).all(|i| (0..3).all(|j| &a[i] * &b[j] == &a[j] * &b[i]))
}

fn fmt_c(z: Complex64) -> String {
    let clean = |v: f64| if v.abs() < 5e-13 { 0.0 } else { v };
    let (re, im) = (clean(z.re), clean(z.im));
    if im == 0.0 {
        fmt_f(re).to_string()
    } else if re == 0.0 {
        format!("{}i", fmt_f(im))
    } else {
        format!("{}{}{}i", fmt_f(re), if im < 0.0 { "-" } else { "+" }, fmt_f(im.abs()))
    }
}

fn fmt_f(v: f64) -> String {
    let r = v.round();
    if (v - r).abs() < 1e-12 {
        format!("{}", r as i64)
    } else {
        format!("{:.10}", v).trim_end_matches('0').to_string()
    }
}

impl fmt::Display for CPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}:{}:{})", fmt_c(self.coords[0]), fmt_c(self.coords[1]), fmt_c(self.coords[2]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_is_idempotent() {
        let p = CPoint::real(2.0, 3.0, 1.0);
        assert_eq!(p.coords[1], Complex64::new(1.0, 0.0));
        let q = CPoint::new(p.coords).unwrap();
        assert_eq!(p, q);
        assert!(CPoint::new([Complex64::new(0.0, 0.0); 3]).is_none());
        assert_eq!(p.to_string(), "(0.6666666667:1:0.3333333333)");
    }

    #[test]
    fn exact_comparison() {
        let a = [GaussRat::from_int(1), GaussRat::from_int(2), GaussRat::from_int(3)];
        let b = [GaussRat::from_int(-2), GaussRat::from_int(-4), GaussRat::from_int(-6)];
        assert!(same_point(&a, &b));
        assert_eq!(normalize_exact(&b)[2], GaussRat::one());
    }
}
