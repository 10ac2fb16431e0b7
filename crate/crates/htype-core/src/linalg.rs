//! Small dense symmetric linear algebra: Cholesky factorization and the
//! cyclic Jacobi eigenvalue iteration, combined into a generalized
//! symmetric-definite solver. Sized for the Galerkin systems here (K <= a
//! few dozen), where Jacobi's robustness beats asymptotics.

use crate::error::{Error, Result};

/// Dense row-major square matrix.
#[derive(Debug, Clone)]
pub struct DMat {
    pub n: usize,
    pub data: Vec<f64>,
}

impl DMat {
    pub fn zeros(n: usize) -> Self {
        DMat {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DMat::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = DMat::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n);
            for (j, &v) in r.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for DMat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(a: &DMat) -> Result<DMat> {
    let n = a.n;
    let mut l = DMat::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return Err(Error::NotPositiveDefinite {
                        pivot: sum,
                        index: i,
                    });
                }
                l[(i, i)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Ok(l)
}

/// Solve L y = b in place (forward substitution).
pub(crate) fn forward_solve(l: &DMat, b: &mut [f64]) {
    let n = l.n;
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= l[(i, k)] * b[k];
        }
        b[i] = v / l[(i, i)];
    }
}

/// Solve L^T y = b in place (back substitution).
pub(crate) fn backward_solve_t(l: &DMat, b: &mut [f64]) {
    let n = l.n;
    for i in (0..n).rev() {
        let mut v = b[i];
        for k in (i + 1)..n {
            v -= l[(k, i)] * b[k];
        }
        b[i] = v / l[(i, i)];
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues ascending with matching eigenvector columns.
pub fn jacobi_eigen(a: &DMat) -> (Vec<f64>, DMat) {
    let n = a.n;
    let mut m = a.clone();
    let mut v = DMat::identity(n);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() <= 1e-15 * (1.0 + m.data.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = DMat::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, col)] = v[(k, src)];
        }
    }
    (eigenvalues, vectors)
}

/// Solve A v = mu B v for symmetric A and SPD B by Cholesky reduction to a
/// standard symmetric problem. Returns eigenvalues ascending and the
/// B-orthonormal eigenvector columns.
pub fn solve_gevp(a: &DMat, b: &DMat) -> Result<(Vec<f64>, DMat)> {
    let n = a.n;
    assert_eq!(b.n, n);
    let l = cholesky(b)?;
    // C = L^{-1} A L^{-T}
    let mut c = DMat::zeros(n);
    // first: columns of L^{-1} A: solve L X = A columnwise on rows
    let mut work = a.clone();
    for j in 0..n {
        let mut col: Vec<f64> = (0..n).map(|i| work[(i, j)]).collect();
        forward_solve(&l, &mut col);
        for i in 0..n {
            work[(i, j)] = col[i];
        }
    }
    // then rows: (L^{-1} A) L^{-T}, i.e. solve L Y^T = X^T rowwise
    for i in 0..n {
        let mut row: Vec<f64> = (0..n).map(|j| work[(i, j)]).collect();
        forward_solve(&l, &mut row);
        for j in 0..n {
            c[(i, j)] = row[j];
        }
    }
    // symmetrize roundoff
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = avg;
            c[(j, i)] = avg;
        }
    }
    let (vals, y) = jacobi_eigen(&c);
    // back-transform eigenvectors: v = L^{-T} y
    let mut vectors = DMat::zeros(n);
    for col in 0..n {
        let mut w: Vec<f64> = (0..n).map(|k| y[(k, col)]).collect();
        backward_solve_t(&l, &mut w);
        for k in 0..n {
            vectors[(k, col)] = w[k];
        }
    }
    Ok((vals, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_pair() {
        let (vals, _) = solve_gevp(&DMat::identity(4), &DMat::identity(4)).unwrap();
        for v in vals {
            assert_relative_eq!(v, 1.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn diagonal_pair() {
        let a = DMat::from_rows(&[vec![1.0, 0.0], vec![0.0, 3.0]]);
        let (vals, _) = solve_gevp(&a, &DMat::identity(2)).unwrap();
        assert_relative_eq!(vals[0], 1.0, max_relative = 1e-13);
        assert_relative_eq!(vals[1], 3.0, max_relative = 1e-13);
    }

    #[test]
    fn not_spd_rejected() {
        let b = DMat::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(
            solve_gevp(&DMat::identity(2), &b),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    // Brute-force 3x3 oracle: roots of det(A - mu B) via the cubic
    // characteristic polynomial, solved by bisection.
    fn det3(m: &DMat) -> f64 {
        m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
            - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
            + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
    }

    fn char_poly(a: &DMat, b: &DMat, mu: f64) -> f64 {
        let mut m = a.clone();
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] -= mu * b[(i, j)];
            }
        }
        det3(&m)
    }

    fn bisect_root(a: &DMat, b: &DMat, mut lo: f64, mut hi: f64) -> f64 {
        let flo = char_poly(a, b, lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = char_poly(a, b, mid);
            if (fm > 0.0) == (flo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn random_spd_pair_matches_characteristic_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..20 {
            // random symmetric A, SPD B = M M^T + I
            let mut a = DMat::zeros(3);
            let mut mm = DMat::zeros(3);
            for i in 0..3 {
                for j in 0..3 {
                    mm[(i, j)] = rng.gen_range(-1.0..1.0);
                    let v = rng.gen_range(-1.0..1.0);
                    a[(i, j)] = v;
                    a[(j, i)] = v;
                }
            }
            let mut b = DMat::identity(3);
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        b[(i, j)] += mm[(i, k)] * mm[(j, k)];
                    }
                }
            }
            let (vals, vecs) = solve_gevp(&a, &b).unwrap();
            assert!(vals.windows(2).all(|w| w[0] <= w[1]));
            // each eigenvalue is a root of det(A - mu B)
            for &mu in &vals {
                let refined = bisect_root(&a, &b, mu - 1e-3, mu + 1e-3);
                assert_relative_eq!(mu, refined, max_relative = 1e-8, epsilon = 1e-8);
            }
            // residual check A v = mu B v
            for col in 0..3 {
                for i in 0..3 {
                    let mut av = 0.0;
                    let mut bv = 0.0;
                    for k in 0..3 {
                        av += a[(i, k)] * vecs[(k, col)];
                        bv += b[(i, k)] * vecs[(k, col)];
                    }
                    assert!((av - vals[col] * bv).abs() <= 1e-10);
                }
            }
        }
    }
}
