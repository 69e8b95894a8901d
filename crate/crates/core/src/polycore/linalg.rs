//! Dense Gaussian elimination, exact over Q(i) and thresholded over floats.

use super::gauss::GaussRat;
use super::scalar::Scalar;

pub type Matrix<K> = Vec<Vec<K>>;

fn scale_of<K: Scalar>(m: &Matrix<K>) -> f64 {
    m.iter().flatten().map(|x| x.magnitude()).fold(0.0, f64::max)
}

/// Reduced row echelon form and pivot columns. Float entries below
/// `1e-9 * scale` count as zero.
pub fn rref<K: Scalar>(m: &Matrix<K>) -> (Matrix<K>, Vec<usize>) {
    let mut a = m.clone();
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let scale = scale_of(m);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let pick = if K::EXACT {
            (r..rows).find(|&i| !a[i][c].is_zero())
        } else {
            (r..rows)
                .filter(|&i| !a[i][c].negligible(scale))
                .max_by(|&i, &j| a[i][c].magnitude().partial_cmp(&a[j][c].magnitude()).unwrap())
        };
        let Some(p) = pick else { continue };
        a.swap(r, p);
        let inv = K::one().over(&a[r][c]);
        for x in a[r].iter_mut() {
            *x = x.times(&inv);
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let t = a[r][j].times(&f);
                    a[i][j] = a[i][j].minus(&t);
                }
                if !K::EXACT {
                    a[i][c] = K::zero();
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank<K: Scalar>(m: &Matrix<K>) -> usize {
    rref(m).1.len()
}

/// Basis of {v : m v = 0}.
pub fn nullspace<K: Scalar>(m: &Matrix<K>) -> Vec<Vec<K>> {
    let cols = if m.is_empty() { 0 } else { m[0].len() };
    let (a, piv) = rref(m);
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !piv.contains(c)) {
        let mut v = vec![K::zero(); cols];
        v[free] = K::one();
        for (r, &pc) in piv.iter().enumerate() {
            v[pc] = a[r][free].negated();
        }
        out.push(v);
    }
    out
}

/// One solution of m x = b, if any.
pub fn solve<K: Scalar>(m: &Matrix<K>, b: &[K]) -> Option<Vec<K>> {
    let cols = if m.is_empty() { 0 } else { m[0].len() };
    let aug: Matrix<K> = m.iter().zip(b).map(|(row, bi)| row.iter().cloned().chain(std::iter::once(bi.clone())).collect()).collect();
    let (a, piv) = rref(&aug);
    if piv.contains(&cols) {
        return None;
    }
    let mut x = vec![K::zero(); cols];
    for (r, &pc) in piv.iter().enumerate() {
        x[pc] = a[r][cols].clone();
    }
    Some(x)
}

pub fn det<K: Scalar>(m: &Matrix<K>) -> K {
    let n = m.len();
    let mut a = m.clone();
    let mut d = K::one();
    for c in 0..n {
        let pick = if K::EXACT {
            (c..n).find(|&i| !a[i][c].is_zero())
        } else {
            (c..n).max_by(|&i, &j| a[i][c].magnitude().partial_cmp(&a[j][c].magnitude()).unwrap())
        };
        let Some(p) = pick else { return K::zero() };
        if a[p][c].is_zero() {
            return K::zero();
        }
        if p != c {
            a.swap(p, c);
            d = d.negated();
        }
        d = d.times(&a[c][c]);
        let inv = K::one().over(&a[c][c]);
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].times(&inv);
            for j in c..n {
                let t = a[c][j].times(&f);
                a[i][j] = a[i][j].minus(&t);
            }
        }
    }
    d
}

pub fn inverse<K: Scalar>(m: &Matrix<K>) -> Option<Matrix<K>> {
    let n = m.len();
    let aug: Matrix<K> = m
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().cloned().chain((0..n).map(|j| if i == j { K::one() } else { K::zero() })).collect())
        .collect();
    let (a, piv) = rref(&aug);
    if piv.len() < n || piv[n - 1] != n - 1 {
        return None;
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn mat_mul<K: Scalar>(a: &Matrix<K>, b: &Matrix<K>) -> Matrix<K> {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut s = K::zero();
                    for l in 0..k {
                        s = s.plus(&a[i][l].times(&b[l][j]));
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn identity<K: Scalar>(n: usize) -> Matrix<K> {
    (0..n).map(|i| (0..n).map(|j| if i == j { K::one() } else { K::zero() }).collect()).collect()
}

pub fn int_matrix(rows: &[&[i64]]) -> Matrix<GaussRat> {
    rows.iter().map(|r| r.iter().map(|&x| GaussRat::from_int(x)).collect()).collect()
}

pub fn to_array3(m: &Matrix<GaussRat>) -> [[GaussRat; 3]; 3] {
    [0, 1, 2].map(|i| [0, 1, 2].map(|j| m[i][j].clone()))
}

pub fn from_array3(m: &[[GaussRat; 3]; 3]) -> Matrix<GaussRat> {
    m.iter().map(|r| r.to_vec()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn exact_rank_and_kernel() {
        let m = int_matrix(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(rank(&m), 2);
        let ns = nullspace(&m);
        assert_eq!(ns.len(), 1);
        let prod = mat_mul(&m, &ns[0].iter().map(|x| vec![x.clone()]).collect());
        assert!(prod.iter().all(|r| r[0].is_zero()));
        assert!(det(&m).is_zero());
    }

    #[test]
    fn inverse_and_solve() {
        let m = int_matrix(&[&[2, 1, 0], &[0, 1, 0], &[1, 0, 3]]);
        let inv = inverse(&m).unwrap();
        assert_eq!(mat_mul(&m, &inv), identity(3));
        assert_eq!(det(&m), GaussRat::from_int(6));
        let b = vec![GaussRat::from_int(3), GaussRat::from_int(1), GaussRat::from_int(4)];
        let x = solve(&m, &b).unwrap();
        assert_eq!(x, vec![GaussRat::from_int(1), GaussRat::from_int(1), GaussRat::from_int(1)]);
    }

    #[test]
    fn numeric_rank() {
        let m: Matrix<Complex64> = vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)],
            vec![Complex64::new(2.0, 0.0), Complex64::new(4.0 + 1e-14, 0.0)],
        ];
        assert_eq!(rank(&m), 1);
    }
}
