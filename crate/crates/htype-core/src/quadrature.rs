//! Integration over G for biradial functions: Gauss-Legendre nodes mapped to
//! the half line by s = scale * r / (1 - r), with the surface measure
//! s^{m-1} tau^{n-1} and the angular prefactor folded into the weights.

use crate::error::{Error, Result};
use crate::jet::Jet;
use statrs::function::gamma::gamma;

/// A function of (s, tau) = (|x|, |t|), evaluated on jets so that seeded
/// calls produce exact derivatives in s and tau.
pub trait BiradialField: Sync {
    fn eval(&self, s: Jet, tau: Jet) -> Jet;

    fn value(&self, s: f64, tau: f64) -> f64 {
        self.eval(Jet::c(s), Jet::c(tau)).v
    }
}

impl<F> BiradialField for F
where
    F: Fn(Jet, Jet) -> Jet + Sync,
{
    fn eval(&self, s: Jet, tau: Jet) -> Jet {
        self(s, tau)
    }
}

/// Surface measure of the unit sphere S^{d-1}: 2 pi^{d/2} / Gamma(d/2).
pub fn sphere_area(d: usize) -> Result<f64> {
    if d < 1 {
        return Err(Error::Domain("sphere dimension must be >= 1".into()));
    }
    let dh = d as f64 / 2.0;
    Ok(2.0 * std::f64::consts::PI.powf(dh) / gamma(dh))
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// One compactified axis: nodes r in (0, 1), physical nodes s = c r/(1 - r),
/// and weights carrying the Gauss weight, the Jacobian c/(1 - r)^2 and the
/// radial factor s^{d-1}.
#[derive(Debug, Clone)]
pub struct Axis {
    /// Nodes in the compactified variable r.
    pub r: Vec<f64>,
    /// Physical nodes.
    pub s: Vec<f64>,
    /// Full quadrature weights (Gauss x Jacobian x s^{d-1}).
    pub w: Vec<f64>,
    /// Gauss weights on (0, 1), without measure factors.
    pub gauss_w: Vec<f64>,
    pub scale: f64,
}

fn build_axis(nodes: usize, scale: f64, d: usize) -> Axis {
    let (gl_x, gl_w) = gauss_legendre(nodes);
    let mut r = Vec::with_capacity(nodes);
    let mut s = Vec::with_capacity(nodes);
    let mut w = Vec::with_capacity(nodes);
    let mut gw = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let ri = 0.5 * (gl_x[i] + 1.0);
        let wi = 0.5 * gl_w[i];
        let si = scale * ri / (1.0 - ri);
        let jac = scale / ((1.0 - ri) * (1.0 - ri));
        r.push(ri);
        s.push(si);
        gw.push(wi);
        w.push(wi * jac * si.powi(d as i32 - 1));
    }
    Axis {
        r,
        s,
        w,
        gauss_w: gw,
        scale,
    }
}

/// Tensor quadrature realizing int_0^inf int_0^inf f(s, tau) s^{m-1} tau^{n-1}
/// ds dtau times the angular prefactor sigma_{m-1} sigma_{n-1}.
#[derive(Debug, Clone)]
pub struct BiradialRule {
    pub m: usize,
    pub n: usize,
    pub s_axis: Axis,
    pub tau_axis: Axis,
    /// sigma_{m-1} * sigma_{n-1}.
    pub angular: f64,
}

/// Build a rule with the given per-axis node count and compactification
/// scale. Deterministic for fixed inputs.
pub fn make_rule(m: usize, n: usize, nodes: usize, scale: f64) -> Result<BiradialRule> {
    if nodes < 8 {
        return Err(Error::Domain(format!(
            "node count must be >= 8, got {nodes}"
        )));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Domain(format!("scale must be positive, got {scale}")));
    }
    let angular = sphere_area(m)? * sphere_area(n)?;
    Ok(BiradialRule {
        m,
        n,
        s_axis: build_axis(nodes, scale, m),
        tau_axis: build_axis(nodes, scale, n),
        angular,
    })
}

/// Neumaier compensated summation in fixed node order, so results are
/// bit-stable regardless of how evaluations are scheduled.
pub(crate) fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Integrate a biradial field against the full measure on G.
pub fn integrate(rule: &BiradialRule, f: &dyn BiradialField) -> Result<f64> {
    let mut terms = Vec::with_capacity(rule.s_axis.s.len() * rule.tau_axis.s.len());
    for (i, &si) in rule.s_axis.s.iter().enumerate() {
        for (j, &tj) in rule.tau_axis.s.iter().enumerate() {
            let v = f.value(si, tj);
            if !v.is_finite() {
                return Err(Error::NonFiniteNode { s: si, tau: tj });
            }
            terms.push(rule.s_axis.w[i] * rule.tau_axis.w[j] * v);
        }
    }
    Ok(rule.angular * compensated_sum(terms.into_iter()))
}

/// Horizontal energy int_G |grad_G u|^2 via the biradial identity
/// |grad_G u|^2 = (d_s u)^2 + (s^2/4)(d_tau u)^2.
pub fn horizontal_energy(rule: &BiradialRule, u: &dyn BiradialField) -> Result<f64> {
    let g = |s: Jet, tau: Jet| -> Jet {
        let j = u.eval(s, tau);
        let us = Jet::c(j.d1);
        let ut = Jet::c(j.d2);
        us * us + s * s * ut * ut * 0.25
    };
    integrate_seeded(rule, &g)
}

// Evaluates f with (s, tau) seeded as (var1, var2) so the integrand closure
// can read first derivatives of inner fields off the jet.
fn integrate_seeded(rule: &BiradialRule, f: &dyn Fn(Jet, Jet) -> Jet) -> Result<f64> {
    let mut terms = Vec::with_capacity(rule.s_axis.s.len() * rule.tau_axis.s.len());
    for (i, &si) in rule.s_axis.s.iter().enumerate() {
        for (j, &tj) in rule.tau_axis.s.iter().enumerate() {
            let v = f(Jet::var1(si), Jet::var2(tj)).v;
            if !v.is_finite() {
                return Err(Error::NonFiniteNode { s: si, tau: tj });
            }
            terms.push(rule.s_axis.w[i] * rule.tau_axis.w[j] * v);
        }
    }
    Ok(rule.angular * compensated_sum(terms.into_iter()))
}

/// Lift a biradial profile to the full group: (x, t) -> u(|x|, |t|).
/// Differentiable off the coordinate axes, where |.| is smooth.
pub fn lift_biradial(u: &dyn BiradialField) -> impl crate::calculus::ScalarField + '_ {
    move |x: &[Jet], t: &[Jet]| {
        let mut x2 = Jet::c(0.0);
        for &xi in x {
            x2 = x2 + xi * xi;
        }
        let mut t2 = Jet::c(0.0);
        for &ti in t {
            t2 = t2 + ti * ti;
        }
        u.eval(x2.sqrt(), t2.sqrt())
    }
}

/// Biradial sub-Laplacian u_ss + (m-1)/s u_s + (s^2/4)(u_tautau + (n-1)/tau u_tau)
/// at off-axis points. Reduction of the full operator for lifted fields;
/// the calculus module is the oracle.
pub fn biradial_sublaplacian(
    m: usize,
    n: usize,
    u: &dyn BiradialField,
    s: f64,
    tau: f64,
) -> f64 {
    let js = u.eval(Jet::var12(s), Jet::c(tau));
    let jt = u.eval(Jet::c(s), Jet::var12(tau));
    let u_s = js.d1;
    let u_ss = js.d12;
    let u_t = jt.d1;
    let u_tt = jt.d12;
    u_ss + (m as f64 - 1.0) / s * u_s + s * s / 4.0 * (u_tt + (n as f64 - 1.0) / tau * u_t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(1).unwrap(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(2).unwrap(), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(4).unwrap(), 2.0 * PI * PI, max_relative = 1e-14);
        assert!(sphere_area(0).is_err());
    }

    #[test]
    fn gauss_legendre_exactness() {
        // Exact for polynomials up to degree 2n - 1.
        let (x, w) = gauss_legendre(8);
        for deg in 0..16 {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg)).sum();
            let exact = if deg % 2 == 0 {
                2.0 / (deg as f64 + 1.0)
            } else {
                0.0
            };
            assert_relative_eq!(q, exact, max_relative = 1e-13, epsilon = 1e-13);
        }
    }

    #[test]
    fn exponential_integral_oracle() {
        // int e^{-s-tau} dmu = sigma_1 sigma_0 Gamma(2) Gamma(1) = 4 pi for (2,1).
        let rule = make_rule(2, 1, 64, 2.0).unwrap();
        let f = |s: Jet, t: Jet| (-s - t).exp();
        let got = integrate(&rule, &f).unwrap();
        assert_relative_eq!(got, 4.0 * PI, max_relative = 1e-10);
    }

    #[test]
    fn bubble_l4_integral_is_pi_squared() {
        // int U^{2Q/(Q-2)} for (2,1): closed form pi^2.
        let rule = make_rule(2, 1, 64, 2.0).unwrap();
        let f = |s: Jet, t: Jet| ((s * s * 0.25 + 1.0).powi(2) + t * t).powi(-2);
        let got = integrate(&rule, &f).unwrap();
        assert_relative_eq!(got, PI * PI, max_relative = 1e-8);
    }

    #[test]
    fn doubling_nodes_never_increases_error() {
        let exact_exp = 4.0 * PI;
        let exact_u4 = PI * PI;
        let fexp = |s: Jet, t: Jet| (-s - t).exp();
        let fu4 = |s: Jet, t: Jet| ((s * s * 0.25 + 1.0).powi(2) + t * t).powi(-2);
        let mut prev_exp = f64::INFINITY;
        let mut prev_u4 = f64::INFINITY;
        for nodes in [8, 16, 32, 64] {
            let rule = make_rule(2, 1, nodes, 2.0).unwrap();
            let e1 = (integrate(&rule, &fexp).unwrap() - exact_exp).abs();
            let e2 = (integrate(&rule, &fu4).unwrap() - exact_u4).abs();
            assert!(e1 <= prev_exp + 1e-13, "exp error grew at {nodes} nodes");
            assert!(e2 <= prev_u4 + 1e-13, "U^4 error grew at {nodes} nodes");
            prev_exp = e1;
            prev_u4 = e2;
        }
    }

    #[test]
    fn integrate_linearity_and_zero() {
        let rule = make_rule(4, 3, 32, 2.0).unwrap();
        let zero = |_: Jet, _: Jet| Jet::c(0.0);
        assert_eq!(integrate(&rule, &zero).unwrap(), 0.0);
        let f = |s: Jet, t: Jet| (-s - t).exp();
        let g = |s: Jet, t: Jet| (-(s * s) - t * t * 0.5).exp();
        let (a, b) = (1.7, -0.9);
        let comb = move |s: Jet, t: Jet| f(s, t) * a + g(s, t) * b;
        let lhs = integrate(&rule, &comb).unwrap();
        let rhs = a * integrate(&rule, &f).unwrap() + b * integrate(&rule, &g).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-13);
    }

    #[test]
    fn non_finite_node_reported() {
        let rule = make_rule(2, 1, 8, 2.0).unwrap();
        let f = |s: Jet, _t: Jet| Jet::c(1.0) / (s - s.v); // 0/0 at every node
        assert!(matches!(
            integrate(&rule, &f),
            Err(Error::NonFiniteNode { .. })
        ));
    }

    #[test]
    fn constant_has_zero_energy() {
        let rule = make_rule(2, 1, 32, 2.0).unwrap();
        // not integrable as a function, but the gradient integrand is 0 everywhere
        let c = |_: Jet, _: Jet| Jet::c(3.0);
        assert_eq!(horizontal_energy(&rule, &c).unwrap(), 0.0);
    }

    #[test]
    fn make_rule_rejects_bad_input() {
        assert!(make_rule(2, 1, 4, 2.0).is_err());
        assert!(make_rule(2, 1, 16, 0.0).is_err());
        assert!(make_rule(2, 1, 16, -1.0).is_err());
    }
}
