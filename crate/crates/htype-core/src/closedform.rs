//! The extremal bubble family, its derived functions omega_i, and pointwise
//! residuals for the closed-form identities they satisfy.

use crate::calculus::{sublaplacian, ScalarField};
use crate::error::{Error, Result};
use crate::group::GroupPoint;
use crate::jet::Jet;
use crate::report::CheckReport;
use crate::structure::HTypeStructure;

/// Dilation and translation parameters of the bubble orbit.
#[derive(Debug, Clone)]
pub struct BubbleParams {
    pub lambda: f64,
    pub eta: GroupPoint,
}

impl BubbleParams {
    pub fn new(lambda: f64, eta: GroupPoint) -> Result<Self> {
        if lambda <= 0.0 || !lambda.is_finite() {
            return Err(Error::Domain(format!(
                "bubble dilation parameter must be positive, got {lambda}"
            )));
        }
        Ok(BubbleParams { lambda, eta })
    }
}

fn denom_jet(x: &[Jet], t: &[Jet]) -> Jet {
    let mut x2 = Jet::c(0.0);
    for &xi in x {
        x2 = x2 + xi * xi;
    }
    let mut t2 = Jet::c(0.0);
    for &ti in t {
        t2 = t2 + ti * ti;
    }
    let a = x2 * 0.25 + 1.0;
    a * a + t2
}

/// The bubble as a jet-evaluatable scalar field for homogeneous dimension q.
pub fn bubble_field(q: usize) -> impl ScalarField {
    let e = -((q as f64) - 2.0) / 4.0;
    move |x: &[Jet], t: &[Jet]| denom_jet(x, t).powf(e)
}

/// U(xi) = [(1 + |x|^2/4)^2 + |t|^2]^{-(Q-2)/4}.
pub fn bubble(s: &HTypeStructure, xi: &GroupPoint) -> f64 {
    bubble_field(s.q()).value(xi)
}

/// Biradial profile of the bubble.
pub fn bubble_biradial(q: usize) -> impl BiradialFieldClone {
    let e = -((q as f64) - 2.0) / 4.0;
    move |s: Jet, tau: Jet| {
        let a = s * s * 0.25 + 1.0;
        (a * a + tau * tau).powf(e)
    }
}

/// Biradial Hardy weight [(1 + s^2/4)^2 + tau^2]^{-1}, which also equals
/// U^{4/(Q-2)} for every Q.
pub fn hardy_weight_biradial() -> impl BiradialFieldClone {
    |s: Jet, tau: Jet| {
        let a = s * s * 0.25 + 1.0;
        (a * a + tau * tau).recip()
    }
}

/// Biradial closed form of omega_{m+n+1}: D^{-1}(1 - s^4/16 - tau^2).
pub fn omega_dilation_biradial() -> impl BiradialFieldClone {
    |s: Jet, tau: Jet| {
        let a = s * s * 0.25 + 1.0;
        let d = a * a + tau * tau;
        (1.0 - s.powi(4) / 16.0 - tau * tau) / d
    }
}

/// Convenience alias: closures implementing the biradial trait and Clone.
pub trait BiradialFieldClone: crate::quadrature::BiradialField + Clone {}
impl<F: crate::quadrature::BiradialField + Clone> BiradialFieldClone for F {}

/// Expanded closed form of U_{lambda,eta} (from the translation formula with
/// eta^{-1} = -eta), jet-evaluatable in the group coordinates.
pub fn bubble_family_field(s: &HTypeStructure, p: &BubbleParams) -> impl ScalarField {
    let q = s.q() as f64;
    let lam = p.lambda;
    let y = p.eta.x.clone();
    let w = p.eta.t.clone();
    let st = s.clone();
    move |x: &[Jet], t: &[Jet]| {
        let m = y.len();
        let n = w.len();
        let mut dx2 = Jet::c(0.0);
        for i in 0..m {
            let d = x[i] - y[i];
            dx2 = dx2 + d * d;
        }
        let a = dx2 * (lam * lam / 4.0) + 1.0;
        let mut tsum = Jet::c(0.0);
        for r in 0..n {
            // t_r - w_r - <y, U^(r) x>/2
            let mut pair = Jet::c(0.0);
            for i in 0..m {
                if y[i] == 0.0 {
                    continue;
                }
                for k in 0..m {
                    pair = pair + x[k] * (st.u(r, i, k) * y[i]);
                }
            }
            let d = t[r] - w[r] - pair * 0.5;
            tsum = tsum + d * d;
        }
        let body = a * a + tsum * lam.powi(4);
        body.powf(-(q - 2.0) / 4.0) * lam.powf((q - 2.0) / 2.0)
    }
}

/// U_{lambda,eta}(xi) via the expanded closed form.
pub fn bubble_family(s: &HTypeStructure, p: &BubbleParams, xi: &GroupPoint) -> f64 {
    bubble_family_field(s, p).value(xi)
}

/// Compositional route: lambda^{(Q-2)/2} U(delta_lambda(eta^{-1} o xi)).
/// Independent of the expanded form; used as its oracle.
pub fn bubble_family_composed(
    s: &HTypeStructure,
    p: &BubbleParams,
    xi: &GroupPoint,
) -> Result<f64> {
    use crate::group::{dilate, inverse, multiply};
    let q = s.q() as f64;
    let shifted = multiply(s, &inverse(&p.eta), xi)?;
    let arg = dilate(p.lambda, &shifted)?;
    Ok(p.lambda.powf((q - 2.0) / 2.0) * bubble(s, &arg))
}

/// omega_i as a jet-evaluatable field, from the closed-form parameter
/// derivatives of the bubble family (index is 0-based here; 0..m are the
/// translation modes in x, m..m+n in t, and m+n is the dilation mode).
pub fn omega_field(s: &HTypeStructure, i: usize) -> impl ScalarField {
    let m = s.m;
    let n = s.n;
    assert!(i < m + n + 1, "omega index out of range");
    let st = s.clone();
    move |x: &[Jet], t: &[Jet]| {
        let d = denom_jet(x, t);
        if i < m {
            // D^{-1} [ (1 + |x|^2/4) x_j + (sum_r t_r U^(r) x)_j ]
            let mut x2 = Jet::c(0.0);
            for &xi in x {
                x2 = x2 + xi * xi;
            }
            let mut jt = Jet::c(0.0);
            for r in 0..n {
                let mut row = Jet::c(0.0);
                for k in 0..m {
                    let c = st.u(r, i, k);
                    if c != 0.0 {
                        row = row + x[k] * c;
                    }
                }
                jt = jt + t[r] * row;
            }
            ((x2 * 0.25 + 1.0) * x[i] + jt) / d
        } else if i < m + n {
            t[i - m] * 2.0 / d
        } else {
            let mut x2 = Jet::c(0.0);
            for &xi in x {
                x2 = x2 + xi * xi;
            }
            let mut t2 = Jet::c(0.0);
            for &ti in t {
                t2 = t2 + ti * ti;
            }
            (1.0 - x2 * x2 / 16.0 - t2) / d
        }
    }
}

/// omega_i(xi), 1-based index as in the m + n + 1 count.
pub fn omega(s: &HTypeStructure, i: usize, xi: &GroupPoint) -> Result<f64> {
    if i < 1 || i > s.m + s.n + 1 {
        return Err(Error::Domain(format!(
            "omega index must be in 1..={}, got {i}",
            s.m + s.n + 1
        )));
    }
    Ok(omega_field(s, i - 1).value(xi))
}

/// All m + n + 1 omega values at a point.
pub fn omega_all(s: &HTypeStructure, xi: &GroupPoint) -> Vec<f64> {
    (0..s.m + s.n + 1)
        .map(|i| omega_field(s, i).value(xi))
        .collect()
}

/// Residual of the Yamabe-type equation
/// Delta_G U_{lambda,eta} + (m(Q-2)/4) U_{lambda,eta}^{(Q+2)/(Q-2)}.
pub fn yamabe_residual(s: &HTypeStructure, p: &BubbleParams, xi: &GroupPoint) -> f64 {
    let q = s.q() as f64;
    let field = bubble_family_field(s, p);
    let lap = sublaplacian(s, &field, xi);
    let u = field.value(xi);
    lap + s.m as f64 * (q - 2.0) / 4.0 * u.powf((q + 2.0) / (q - 2.0))
}

/// Residual of the linearized equation
/// Delta_G(U omega_i) + (m(Q+2)/4) U^{4/(Q-2)} (U omega_i), 1-based index.
pub fn eigen_residual(s: &HTypeStructure, i: usize, xi: &GroupPoint) -> Result<f64> {
    if i < 1 || i > s.m + s.n + 1 {
        return Err(Error::Domain(format!(
            "eigen index must be in 1..={}, got {i}",
            s.m + s.n + 1
        )));
    }
    let q = s.q() as f64;
    let qd = s.q();
    let idx = i - 1;
    let st = s.clone();
    let field = move |x: &[Jet], t: &[Jet]| {
        bubble_field(qd).eval(x, t) * omega_field(&st, idx).eval(x, t)
    };
    let lap = sublaplacian(s, &field, xi);
    let u = bubble(s, xi);
    let f = field.value(xi);
    Ok(lap + s.m as f64 * (q + 2.0) / 4.0 * u.powf(4.0 / (q - 2.0)) * f)
}

/// Parameter-jet derivatives of U_{lambda,eta}(xi) at lambda = 1, eta = 0:
/// (d/dy_j, d/dw_r, d/dlambda), computed by seeding the parameters rather
/// than the coordinates. Independent oracle for the closed-form omega_i.
pub fn parameter_derivatives(s: &HTypeStructure, xi: &GroupPoint) -> Vec<f64> {
    let q = s.q() as f64;
    let m = s.m;
    let n = s.n;
    // U as a function of (lambda, y, w) at fixed xi.
    let eval = |lam: Jet, y: &[Jet], w: &[Jet]| -> Jet {
        let mut dx2 = Jet::c(0.0);
        for i in 0..m {
            let d = -y[i] + xi.x[i];
            dx2 = dx2 + d * d;
        }
        let a = dx2 * lam * lam * 0.25 + 1.0;
        let mut tsum = Jet::c(0.0);
        for r in 0..n {
            let mut pair = Jet::c(0.0);
            for i in 0..m {
                for k in 0..m {
                    let c = s.u(r, i, k) * xi.x[k];
                    if c != 0.0 {
                        pair = pair + y[i] * c;
                    }
                }
            }
            let d = -w[r] + xi.t[r] - pair * 0.5;
            tsum = tsum + d * d;
        }
        let body = a * a + lam.powi(4) * tsum;
        body.powf(-(q - 2.0) / 4.0) * lam.powf((q - 2.0) / 2.0)
    };
    let mut out = Vec::with_capacity(m + n + 1);
    let zeros_m: Vec<Jet> = vec![Jet::c(0.0); m];
    let zeros_n: Vec<Jet> = vec![Jet::c(0.0); n];
    for j in 0..m {
        let mut y = zeros_m.clone();
        y[j] = Jet::var1(0.0);
        out.push(eval(Jet::c(1.0), &y, &zeros_n).d1);
    }
    for r in 0..n {
        let mut w = zeros_n.clone();
        w[r] = Jet::var1(0.0);
        out.push(eval(Jet::c(1.0), &zeros_m, &w).d1);
    }
    out.push(eval(Jet::var1(1.0), &zeros_m, &zeros_n).d1);
    out
}

/// Sum-of-squares identity: the weighted square sum of the parameter
/// derivatives equals ((Q-2)^2/16) U(xi)^2. Left side computed with
/// parameter jets, right side from the closed-form bubble.
pub fn sum_of_squares_check(s: &HTypeStructure, xi: &GroupPoint) -> CheckReport {
    let q = s.q() as f64;
    let d = parameter_derivatives(s, xi);
    let m = s.m;
    let n = s.n;
    let mut lhs = 0.0;
    for v in &d[..m + n] {
        lhs += v * v;
    }
    lhs += 0.25 * d[m + n] * d[m + n];
    let u = bubble(s, xi);
    let rhs = (q - 2.0) * (q - 2.0) / 16.0 * u * u;
    CheckReport::new("closedform.sum_of_squares", lhs, rhs, 1e-300, 1e-10)
        .with_param("m", m)
        .with_param("n", n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::construct_structure;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut impl Rng, m: usize, n: usize) -> GroupPoint {
        GroupPoint::new(
            (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        )
    }

    #[test]
    fn bubble_values() {
        let s = construct_structure(2, 1).unwrap();
        assert_relative_eq!(bubble(&s, &GroupPoint::origin(2, 1)), 1.0);
        let p = GroupPoint::new(vec![2.0, 0.0], vec![0.0]);
        assert_relative_eq!(bubble(&s, &p), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn bubble_decay_rate() {
        // U ~ rho^{-(Q-2)} as rho -> infinity, checked at rho = 1e3.
        let s = construct_structure(2, 1).unwrap();
        let q = s.q() as f64;
        let rho: f64 = 1e3;
        // point on the x-axis with hom-norm rho: |x| = 2 rho
        let p = GroupPoint::new(vec![2.0 * rho, 0.0], vec![0.0]);
        let got = bubble(&s, &p);
        assert_relative_eq!(got, rho.powf(-(q - 2.0)), max_relative = 0.05);
    }

    #[test]
    fn bubble_family_reductions() {
        let s = construct_structure(2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let id = BubbleParams::new(1.0, GroupPoint::origin(2, 1)).unwrap();
        for _ in 0..10 {
            let xi = random_point(&mut rng, 2, 1);
            assert_relative_eq!(
                bubble_family(&s, &id, &xi),
                bubble(&s, &xi),
                max_relative = 1e-14
            );
        }
        // xi = eta gives lambda^{(Q-2)/2}
        let eta = random_point(&mut rng, 2, 1);
        let p = BubbleParams::new(2.5, eta.clone()).unwrap();
        let q = s.q() as f64;
        assert_relative_eq!(
            bubble_family(&s, &p, &eta),
            2.5f64.powf((q - 2.0) / 2.0),
            max_relative = 1e-13
        );
        assert!(BubbleParams::new(0.0, eta).is_err());
    }

    #[test]
    fn expanded_matches_composed() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for (m, n) in [(2, 1), (4, 3)] {
            let s = construct_structure(m, n).unwrap();
            for _ in 0..30 {
                let eta = random_point(&mut rng, m, n);
                let xi = random_point(&mut rng, m, n);
                let lam = rng.gen_range(0.3..3.0);
                let p = BubbleParams::new(lam, eta).unwrap();
                let a = bubble_family(&s, &p, &xi);
                let b = bubble_family_composed(&s, &p, &xi).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn omega_hand_values() {
        let s = construct_structure(2, 1).unwrap();
        let origin = GroupPoint::origin(2, 1);
        assert_relative_eq!(omega(&s, 4, &origin).unwrap(), 1.0);
        let p = GroupPoint::new(vec![2.0, 0.0], vec![0.0]);
        let w = omega_all(&s, &p);
        assert_relative_eq!(w[0], 1.0, max_relative = 1e-14);
        assert!(w[1].abs() < 1e-15 && w[2].abs() < 1e-15 && w[3].abs() < 1e-15);
        assert!(omega(&s, 0, &p).is_err());
        assert!(omega(&s, 5, &p).is_err());
    }

    #[test]
    fn omega_sum_of_squares_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for (m, n) in [(2, 1), (4, 3), (8, 7)] {
            let s = construct_structure(m, n).unwrap();
            for _ in 0..100 {
                let xi = random_point(&mut rng, m, n);
                let sum: f64 = omega_all(&s, &xi).iter().map(|w| w * w).sum();
                assert!((sum - 1.0).abs() <= 1e-12, "({m},{n}): sum = {sum}");
            }
        }
    }

    #[test]
    fn omega_parity() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let s = construct_structure(4, 3).unwrap();
        for _ in 0..20 {
            let xi = random_point(&mut rng, 4, 3);
            let neg_x = GroupPoint::new(xi.x.iter().map(|v| -v).collect(), xi.t.clone());
            let neg_t = GroupPoint::new(xi.x.clone(), xi.t.iter().map(|v| -v).collect());
            let w = omega_all(&s, &xi);
            let wx = omega_all(&s, &neg_x);
            let wt = omega_all(&s, &neg_t);
            for j in 0..4 {
                assert_relative_eq!(w[j], -wx[j], max_relative = 1e-13, epsilon = 1e-15);
            }
            for r in 4..7 {
                assert_relative_eq!(w[r], -wt[r], max_relative = 1e-13, epsilon = 1e-15);
            }
            assert_relative_eq!(w[7], wx[7], max_relative = 1e-13, epsilon = 1e-15);
            assert_relative_eq!(w[7], wt[7], max_relative = 1e-13, epsilon = 1e-15);
        }
    }

    #[test]
    fn closed_form_omega_matches_parameter_jets() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for (m, n) in [(2, 1), (4, 3)] {
            let s = construct_structure(m, n).unwrap();
            let q = s.q() as f64;
            for _ in 0..25 {
                let xi = random_point(&mut rng, m, n);
                let u = bubble(&s, &xi);
                let d = parameter_derivatives(&s, &xi);
                let w = omega_all(&s, &xi);
                for j in 0..m + n {
                    let from_jet = 4.0 / (q - 2.0) / u * d[j];
                    assert!((w[j] - from_jet).abs() <= 1e-10);
                }
                let from_jet = 2.0 / (q - 2.0) / u * d[m + n];
                assert!((w[m + n] - from_jet).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn yamabe_residual_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let s = construct_structure(2, 1).unwrap();
        let id = BubbleParams::new(1.0, GroupPoint::origin(2, 1)).unwrap();
        assert!(yamabe_residual(&s, &id, &GroupPoint::origin(2, 1)).abs() <= 1e-10);
        for _ in 0..20 {
            let eta = random_point(&mut rng, 2, 1);
            let xi = random_point(&mut rng, 2, 1);
            let p = BubbleParams::new(2.0, eta).unwrap();
            assert!(yamabe_residual(&s, &p, &xi).abs() <= 1e-8);
        }
    }

    #[test]
    fn yamabe_exponent_negative_control() {
        // Perturbing the decay exponent must break the identity visibly.
        let s = construct_structure(2, 1).unwrap();
        let q = s.q() as f64;
        let bad = move |x: &[Jet], t: &[Jet]| denom_jet(x, t).powf(-(q - 2.0) / 4.0 - 0.1);
        let xi = GroupPoint::new(vec![0.8, -0.3], vec![0.5]);
        let lap = sublaplacian(&s, &bad, &xi);
        let u = ScalarField::value(&bad, &xi);
        let res = lap + s.m as f64 * (q - 2.0) / 4.0 * u.powf((q + 2.0) / (q - 2.0));
        assert!(res.abs() > 1e-3, "residual {res} should be far from zero");
    }

    #[test]
    fn eigen_residual_vanishes_for_all_modes() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let s = construct_structure(2, 1).unwrap();
        assert!(eigen_residual(&s, 4, &GroupPoint::origin(2, 1))
            .unwrap()
            .abs()
            <= 1e-10);
        for i in 1..=4 {
            for _ in 0..25 {
                let xi = random_point(&mut rng, 2, 1);
                let r = eigen_residual(&s, i, &xi).unwrap();
                assert!(r.abs() <= 1e-8, "mode {i}: residual {r}");
            }
        }
    }

    #[test]
    fn eigen_residual_mu1_negative_control() {
        // Using mu_1 = m(Q-2)/4 instead of m(Q+2)/4 for a translation mode
        // leaves a visibly nonzero residual.
        let s = construct_structure(2, 1).unwrap();
        let q = s.q() as f64;
        let field = |x: &[Jet], t: &[Jet]| {
            bubble_field(4).eval(x, t) * omega_field(&construct_structure(2, 1).unwrap(), 0).eval(x, t)
        };
        let xi = GroupPoint::new(vec![0.9, 0.2], vec![-0.4]);
        let lap = sublaplacian(&s, &field, &xi);
        let u = bubble(&s, &xi);
        let f = ScalarField::value(&field, &xi);
        let res = lap + s.m as f64 * (q - 2.0) / 4.0 * u.powf(4.0 / (q - 2.0)) * f;
        assert!(res.abs() > 1e-3);
    }

    #[test]
    fn sum_of_squares_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let s2 = construct_structure(2, 1).unwrap();
        let origin = GroupPoint::origin(2, 1);
        let r = sum_of_squares_check(&s2, &origin);
        assert!(r.pass);
        assert_relative_eq!(r.computed, 0.25, max_relative = 1e-12);
        let s = construct_structure(4, 3).unwrap();
        for _ in 0..100 {
            let xi = random_point(&mut rng, 4, 3);
            assert!(sum_of_squares_check(&s, &xi).pass);
        }
    }
}
