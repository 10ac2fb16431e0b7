//! Construction and validation of the skew-symmetric, orthogonal, pairwise
//! anticommuting matrix families that define an H-type group.
//!
//! The canonical generators are left-multiplication matrices of the
//! Cayley-Dickson algebras (complex, quaternion, octonion), so every entry is
//! exactly -1, 0 or +1 and all defining conditions hold in integer arithmetic.

use crate::error::{Error, Result};
use crate::report::CheckReport;
use serde::{Deserialize, Serialize};

/// The pair (m, n) together with the n structure matrices U^(1..n).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HTypeStructure {
    pub m: usize,
    pub n: usize,
    /// n dense m x m matrices, row-major, integer entries.
    pub mats: Vec<Vec<Vec<i64>>>,
}

impl HTypeStructure {
    /// Homogeneous dimension Q = m + 2n.
    pub fn q(&self) -> usize {
        self.m + 2 * self.n
    }

    /// Entry U^(r)_{i,j} as f64.
    #[inline]
    pub fn u(&self, r: usize, i: usize, j: usize) -> f64 {
        self.mats[r][i][j] as f64
    }

    /// Critical Sobolev exponent 2Q/(Q-2).
    pub fn critical_exponent(&self) -> f64 {
        let q = self.q() as f64;
        2.0 * q / (q - 2.0)
    }
}

/// Radon-Hurwitz number rho(m) = 8a + 2^b for m = odd * 2^(4a+b), 0 <= b <= 3.
pub fn radon_hurwitz(m: usize) -> usize {
    assert!(m >= 1);
    let e = m.trailing_zeros() as usize;
    let (a, b) = (e / 4, e % 4);
    8 * a + (1 << b)
}

/// Minimal horizontal dimension carrying n anticommuting complex structures.
fn minimal_m(n: usize) -> usize {
    match n {
        1 => 2,
        2 | 3 => 4,
        4..=7 => 8,
        8 => 16,
        _ => unreachable!("construction limited to n <= 8"),
    }
}

// --- Cayley-Dickson arithmetic on integer coordinate vectors ---

fn cd_conj(a: &[i64]) -> Vec<i64> {
    let mut r = a.to_vec();
    for x in r.iter_mut().skip(1) {
        *x = -*x;
    }
    r
}

/// (a, b)(c, d) = (ac - d*b, da + bc*), where * is conjugation.
fn cd_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    let k = a.len();
    if k == 1 {
        return vec![a[0] * b[0]];
    }
    let h = k / 2;
    let (a1, a2) = (&a[..h], &a[h..]);
    let (b1, b2) = (&b[..h], &b[h..]);
    let left = sub(&cd_mul(a1, b1), &cd_mul(&cd_conj(b2), a2));
    let right = add(&cd_mul(b2, a1), &cd_mul(a2, &cd_conj(b1)));
    let mut out = left;
    out.extend(right);
    out
}

fn add(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Left-multiplication matrix of basis unit e_u in the dimension-`dim`
/// Cayley-Dickson algebra: column k is e_u * e_k.
fn left_mult_matrix(dim: usize, u: usize) -> Vec<Vec<i64>> {
    let mut eu = vec![0i64; dim];
    eu[u] = 1;
    let mut mat = vec![vec![0i64; dim]; dim];
    for k in 0..dim {
        let mut ek = vec![0i64; dim];
        ek[k] = 1;
        let col = cd_mul(&eu, &ek);
        for j in 0..dim {
            mat[j][k] = col[j];
        }
    }
    mat
}

fn transpose(a: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    let mut t = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            t[j][i] = a[i][j];
        }
    }
    t
}

/// Generators on R^{m_min}: transposed left multiplications by the first n
/// imaginary units, except n = 8 which doubles the octonions to 16 x 16
/// blocks [[0, L_u], [-L_u^T, 0]] over all eight basis units.
fn base_generators(n: usize) -> Vec<Vec<Vec<i64>>> {
    if n <= 7 {
        let dim = minimal_m(n);
        (1..=n)
            .map(|r| transpose(&left_mult_matrix(dim, r)))
            .collect()
    } else {
        (0..8)
            .map(|u| {
                let l = left_mult_matrix(8, u);
                let lt = transpose(&l);
                let mut b = vec![vec![0i64; 16]; 16];
                for i in 0..8 {
                    for j in 0..8 {
                        b[i][8 + j] = l[i][j];
                        b[8 + i][j] = -lt[i][j];
                    }
                }
                b
            })
            .collect()
    }
}

/// Build the canonical structure matrices for an admissible pair (m, n).
///
/// Deterministic: the same (m, n) always yields the same matrices, with all
/// entries in {-1, 0, +1}. For m a multiple of the minimal dimension the
/// generators are repeated block-diagonally.
pub fn construct_structure(m: usize, n: usize) -> Result<HTypeStructure> {
    if n == 0 {
        return Err(Error::DegenerateStructure);
    }
    if n > 8 {
        return Err(Error::UnsupportedCenter { n });
    }
    let max_n = radon_hurwitz(m).saturating_sub(1);
    if n > max_n {
        return Err(Error::Inadmissible { m, n, max_n });
    }
    let mm = minimal_m(n);
    debug_assert_eq!(m % mm, 0, "RH-admissible (m, n) must have m_min | m");
    let copies = m / mm;
    let base = base_generators(n);
    let mats = base
        .into_iter()
        .map(|g| {
            let mut big = vec![vec![0i64; m]; m];
            for c in 0..copies {
                let off = c * mm;
                for i in 0..mm {
                    for j in 0..mm {
                        big[off + i][off + j] = g[i][j];
                    }
                }
            }
            big
        })
        .collect();
    Ok(HTypeStructure { m, n, mats })
}

/// One report per defining condition: skew-symmetry, orthogonality, and
/// pairwise anticommutation, each reporting the max entrywise deviation.
pub fn verify_structure(s: &HTypeStructure, tol: f64) -> Vec<CheckReport> {
    let m = s.m;
    let mut skew = 0.0f64;
    let mut orth = 0.0f64;
    let mut anti = 0.0f64;
    for r in 0..s.n {
        let u = &s.mats[r];
        for i in 0..m {
            for j in 0..m {
                skew = skew.max((u[i][j] + u[j][i]).abs() as f64);
                // (U^T U)_{ij}
                let mut dot = 0i64;
                for k in 0..m {
                    dot += u[k][i] * u[k][j];
                }
                let expect = i64::from(i == j);
                orth = orth.max((dot - expect).abs() as f64);
            }
        }
        for r2 in (r + 1)..s.n {
            let w = &s.mats[r2];
            for i in 0..m {
                for j in 0..m {
                    let mut acc = 0i64;
                    for k in 0..m {
                        acc += u[i][k] * w[k][j] + w[i][k] * u[k][j];
                    }
                    anti = anti.max(acc.abs() as f64);
                }
            }
        }
    }
    vec![
        CheckReport::new("structure.skew_symmetry", skew, 0.0, tol, tol)
            .with_param("m", m)
            .with_param("n", s.n),
        CheckReport::new("structure.orthogonality", orth, 0.0, tol, tol)
            .with_param("m", m)
            .with_param("n", s.n),
        CheckReport::new("structure.anticommutation", anti, 0.0, tol, tol)
            .with_param("m", m)
            .with_param("n", s.n),
    ]
}

/// J_z v with components (J_z v)_j = sum_r sum_i z_r v_i U^(r)_{i,j}.
pub fn j_map(s: &HTypeStructure, z: &[f64], v: &[f64]) -> Vec<f64> {
    assert_eq!(z.len(), s.n);
    assert_eq!(v.len(), s.m);
    let mut out = vec![0.0; s.m];
    for r in 0..s.n {
        if z[r] == 0.0 {
            continue;
        }
        for i in 0..s.m {
            if v[i] == 0.0 {
                continue;
            }
            let zv = z[r] * v[i];
            for j in 0..s.m {
                out[j] += zv * s.u(r, i, j);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn radon_hurwitz_values() {
        assert_eq!(radon_hurwitz(8), 8);
        assert_eq!(radon_hurwitz(12), 4);
        assert_eq!(radon_hurwitz(1), 1);
        // rho(2^k) for k = 1..4
        assert_eq!(
            (1..=4).map(|k| radon_hurwitz(1 << k)).collect::<Vec<_>>(),
            vec![2, 4, 8, 9]
        );
    }

    #[test]
    fn canonical_2_1() {
        let s = construct_structure(2, 1).unwrap();
        assert_eq!(s.mats[0], vec![vec![0, 1], vec![-1, 0]]);
        assert!(verify_structure(&s, 1e-12).iter().all(|r| r.pass));
    }

    #[test]
    fn quaternionic_4_3() {
        let s = construct_structure(4, 3).unwrap();
        assert!(verify_structure(&s, 1e-12)
            .iter()
            .all(|r| r.pass && r.abs_err == 0.0));
        for mat in &s.mats {
            for row in mat {
                assert!(row.iter().all(|&e| (-1..=1).contains(&e)));
            }
        }
    }

    #[test]
    fn all_base_families_exact() {
        for (m, n) in [(2, 1), (4, 1), (4, 2), (4, 3), (8, 5), (8, 7), (16, 8), (12, 3), (24, 7)] {
            let s = construct_structure(m, n).unwrap();
            let reports = verify_structure(&s, 1e-12);
            assert!(
                reports.iter().all(|r| r.pass && r.abs_err == 0.0),
                "({m}, {n}): {reports:?}"
            );
        }
    }

    #[test]
    fn inadmissible_pairs_rejected() {
        match construct_structure(2, 2) {
            Err(Error::Inadmissible { max_n, .. }) => assert_eq!(max_n, 1),
            other => panic!("expected admissibility error, got {other:?}"),
        }
        assert!(matches!(
            construct_structure(4, 0),
            Err(Error::DegenerateStructure)
        ));
        assert!(matches!(
            construct_structure(32, 9),
            Err(Error::UnsupportedCenter { n: 9 })
        ));
    }

    #[test]
    fn identity_matrix_fails_skew_check() {
        let s = HTypeStructure {
            m: 2,
            n: 1,
            mats: vec![vec![vec![1, 0], vec![0, 1]]],
        };
        let reports = verify_structure(&s, 1e-12);
        assert!(!reports[0].pass);
        assert_eq!(reports[0].abs_err, 2.0);
    }

    #[test]
    fn j_map_hand_example() {
        let s = construct_structure(2, 1).unwrap();
        let out = j_map(&s, &[1.0], &[1.0, 0.0]);
        assert_eq!(out, vec![0.0, 1.0]);
        let zero = j_map(&s, &[0.0], &[0.3, -0.7]);
        assert_eq!(zero, vec![0.0, 0.0]);
    }

    #[test]
    fn isometry_and_skew_pairing() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (m, n) in [(2, 1), (4, 3), (8, 7), (16, 8)] {
            let s = construct_structure(m, n).unwrap();
            for _ in 0..100 {
                let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let jv = j_map(&s, &z, &v);
                let nj: f64 = jv.iter().map(|x| x * x).sum();
                let nz: f64 = z.iter().map(|x| x * x).sum();
                let nv: f64 = v.iter().map(|x| x * x).sum();
                assert!((nj - nz * nv).abs() <= 1e-12 * (nz * nv).max(1.0));
                let pair: f64 = v.iter().zip(&jv).map(|(a, b)| a * b).sum();
                assert!(pair.abs() <= 1e-12 * (nz * nv).max(1.0));
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let s = construct_structure(4, 2).unwrap();
        let js = serde_json::to_string(&s).unwrap();
        let back: HTypeStructure = serde_json::from_str(&js).unwrap();
        assert_eq!(back.mats, s.mats);
        assert_eq!(back.q(), 8);
    }
}
