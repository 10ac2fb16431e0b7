//! Exact derivatives of scalar fields on G through jet-extended evaluation,
//! and the left-invariant operators built from them: the horizontal gradient
//! (X_1, ..., X_m) and the sub-Laplacian.

use crate::group::GroupPoint;
use crate::jet::Jet;
use crate::structure::HTypeStructure;

/// A twice-differentiable scalar field on G. Evaluation receives the
/// coordinates as jets so that seeded calls produce exact first and second
/// derivatives. Implementations must be reentrant (no interior mutation).
pub trait ScalarField: Sync {
    fn eval(&self, x: &[Jet], t: &[Jet]) -> Jet;

    fn value(&self, p: &GroupPoint) -> f64 {
        let x: Vec<Jet> = p.x.iter().map(|&v| Jet::c(v)).collect();
        let t: Vec<Jet> = p.t.iter().map(|&v| Jet::c(v)).collect();
        self.eval(&x, &t).v
    }
}

impl<F> ScalarField for F
where
    F: Fn(&[Jet], &[Jet]) -> Jet + Sync,
{
    fn eval(&self, x: &[Jet], t: &[Jet]) -> Jet {
        self(x, t)
    }
}

/// Value, Euclidean gradient and symmetric Hessian at a point.
#[derive(Debug, Clone)]
pub struct Deriv2 {
    pub value: f64,
    /// Length m + n, x-block first.
    pub grad: Vec<f64>,
    /// (m+n) x (m+n), symmetric by construction.
    pub hess: Vec<Vec<f64>>,
}

fn seeded(p: &GroupPoint, a: usize, b: usize) -> (Vec<Jet>, Vec<Jet>) {
    let m = p.x.len();
    let coords: Vec<f64> = p.x.iter().chain(&p.t).copied().collect();
    let mut jets: Vec<Jet> = coords.iter().map(|&v| Jet::c(v)).collect();
    if a == b {
        jets[a] = Jet::var12(coords[a]);
    } else {
        jets[a] = Jet::var1(coords[a]);
        jets[b] = Jet::var2(coords[b]);
    }
    let t = jets.split_off(m);
    (jets, t)
}

/// Exact Euclidean derivatives up to second order via second-order forward
/// perturbation over coordinate pairs: (m+n)(m+n+1)/2 field evaluations.
pub fn euclid_derivatives(u: &dyn ScalarField, p: &GroupPoint) -> Deriv2 {
    let dim = p.x.len() + p.t.len();
    let mut value = 0.0;
    let mut grad = vec![0.0; dim];
    let mut hess = vec![vec![0.0; dim]; dim];
    for a in 0..dim {
        let (x, t) = seeded(p, a, a);
        let j = u.eval(&x, &t);
        value = j.v;
        grad[a] = j.d1;
        hess[a][a] = j.d12;
        for b in (a + 1)..dim {
            let (x, t) = seeded(p, a, b);
            let j = u.eval(&x, &t);
            hess[a][b] = j.d12;
            hess[b][a] = j.d12;
        }
    }
    Deriv2 { value, grad, hess }
}

/// Euclidean gradient only: m + n field evaluations.
pub fn euclid_gradient(u: &dyn ScalarField, p: &GroupPoint) -> Vec<f64> {
    let dim = p.x.len() + p.t.len();
    (0..dim)
        .map(|a| {
            let (x, t) = seeded(p, a, a);
            u.eval(&x, &t).d1
        })
        .collect()
}

/// Coefficient of d/dt_k in X_j at horizontal position x: (1/2)(U^(k)T x)_j.
#[inline]
fn t_coeff(s: &HTypeStructure, x: &[f64], k: usize, j: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..s.m {
        acc += s.u(k, i, j) * x[i];
    }
    0.5 * acc
}

/// Horizontal gradient (X_1 u, ..., X_m u) at a point.
pub fn horizontal_gradient(s: &HTypeStructure, u: &dyn ScalarField, p: &GroupPoint) -> Vec<f64> {
    let g = euclid_gradient(u, p);
    let m = s.m;
    (0..m)
        .map(|j| {
            let mut xj = g[j];
            for k in 0..s.n {
                xj += t_coeff(s, &p.x, k, j) * g[m + k];
            }
            xj
        })
        .collect()
}

/// Sub-Laplacian from the expanded formula
/// Delta_x u + (1/4)|x|^2 Delta_t u + sum_k <x, U^(k) grad_x> d u/d t_k,
/// assembled from the Euclidean jet derivatives.
pub fn sublaplacian(s: &HTypeStructure, u: &dyn ScalarField, p: &GroupPoint) -> f64 {
    let d = euclid_derivatives(u, p);
    sublaplacian_from(s, &d, p)
}

/// Same, reusing precomputed Euclidean derivatives.
pub fn sublaplacian_from(s: &HTypeStructure, d: &Deriv2, p: &GroupPoint) -> f64 {
    let m = s.m;
    let n = s.n;
    let mut lap_x = 0.0;
    for j in 0..m {
        lap_x += d.hess[j][j];
    }
    let mut lap_t = 0.0;
    for k in 0..n {
        lap_t += d.hess[m + k][m + k];
    }
    let x2: f64 = p.x.iter().map(|v| v * v).sum();
    let mut cross = 0.0;
    for k in 0..n {
        for i in 0..m {
            if p.x[i] == 0.0 {
                continue;
            }
            for j in 0..m {
                cross += p.x[i] * s.u(k, i, j) * d.hess[j][m + k];
            }
        }
    }
    lap_x + 0.25 * x2 * lap_t + cross
}

/// X_i(X_j u) expanded in Euclidean derivatives. The coefficient functions of
/// X_j are linear in x, so this is exact given the jet Hessian:
///
///   X_i X_j u = d2u/dx_i dx_j
///             + c_i(k) d2u/dx_j dt_k + c_j(k) d2u/dx_i dt_k
///             + c_i(k) c_j(l) d2u/dt_k dt_l
///             + (1/2) U^(k)_{i,j} du/dt_k
///
/// with c_j(k) = (1/2)(U^(k)T x)_j. Retained as the composition oracle for
/// the expanded sub-Laplacian and the bracket relation.
pub fn xx_compose(
    s: &HTypeStructure,
    d: &Deriv2,
    p: &GroupPoint,
    i: usize,
    j: usize,
) -> f64 {
    let m = s.m;
    let mut acc = d.hess[i][j];
    for k in 0..s.n {
        let ci = t_coeff(s, &p.x, k, i);
        let cj = t_coeff(s, &p.x, k, j);
        acc += ci * d.hess[j][m + k] + cj * d.hess[i][m + k];
        for l in 0..s.n {
            acc += ci * t_coeff(s, &p.x, l, j) * d.hess[m + k][m + l];
        }
        acc += 0.5 * s.u(k, i, j) * d.grad[m + k];
    }
    acc
}
