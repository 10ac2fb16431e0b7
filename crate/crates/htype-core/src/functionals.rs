//! Variational quantities: the sharp constant, the critical and Hardy
//! quotients, the subcritical quotient F_p and the moment integrals.

use crate::closedform::{bubble_biradial, hardy_weight_biradial, omega_dilation_biradial};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::quadrature::{horizontal_energy, integrate, BiradialField, BiradialRule};
use crate::report::CheckReport;
use crate::structure::radon_hurwitz;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

/// A Rayleigh-type quotient with its numerator and denominator reported
/// separately so both can be pinned by tests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuotientReport {
    pub name: String,
    /// Horizontal energy.
    pub numerator: f64,
    /// Norm term after its exponent has been applied.
    pub denominator: f64,
    /// Raw integral before the exponent.
    pub denominator_integral: f64,
    pub quotient: f64,
    /// Exponent applied to the raw integral.
    pub exponent: f64,
    pub p: Option<f64>,
}

/// S_{m,n} = 4^{-2n/Q} m(Q-2) pi^{(m+n)/Q} (Gamma((m+n)/2)/Gamma(m+n))^{2/Q}.
pub fn sharp_constant(m: usize, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::DegenerateStructure);
    }
    let max_n = radon_hurwitz(m).saturating_sub(1);
    if n > max_n {
        return Err(Error::Inadmissible { m, n, max_n });
    }
    let q = (m + 2 * n) as f64;
    let mn = (m + n) as f64;
    let (mf, nf) = (m as f64, n as f64);
    let gamma_ratio = (ln_gamma(mn / 2.0) - ln_gamma(mn)).exp();
    Ok(4f64.powf(-2.0 * nf / q)
        * mf
        * (q - 2.0)
        * std::f64::consts::PI.powf(mn / q)
        * gamma_ratio.powf(2.0 / q))
}

/// Folland-Stein quotient: energy over the critical L^{2Q/(Q-2)} norm.
pub fn fs_quotient(rule: &BiradialRule, q: usize, u: &dyn BiradialField) -> Result<QuotientReport> {
    let qf = q as f64;
    let crit = 2.0 * qf / (qf - 2.0);
    let num = horizontal_energy(rule, u)?;
    let den_int = integrate(rule, &|s: Jet, t: Jet| {
        let v = u.eval(s, t);
        let a = if v.v < 0.0 { -v } else { v };
        a.powf(crit)
    })?;
    if den_int <= 0.0 {
        return Err(Error::Domain("degenerate input: zero critical norm".into()));
    }
    let exponent = (qf - 2.0) / qf;
    let den = den_int.powf(exponent);
    Ok(QuotientReport {
        name: "folland_stein".into(),
        numerator: num,
        denominator: den,
        denominator_integral: den_int,
        quotient: num / den,
        exponent,
        p: None,
    })
}

/// Hardy quotient: energy over the weighted L^2 norm with the bubble weight.
pub fn hardy_quotient(rule: &BiradialRule, u: &dyn BiradialField) -> Result<QuotientReport> {
    let weight = hardy_weight_biradial();
    let num = horizontal_energy(rule, u)?;
    let den = integrate(rule, &|s: Jet, t: Jet| {
        let v = u.eval(s, t);
        v * v * weight.eval(s, t)
    })?;
    if den <= 0.0 {
        return Err(Error::Domain("degenerate input: zero Hardy norm".into()));
    }
    Ok(QuotientReport {
        name: "hardy".into(),
        numerator: num,
        denominator: den,
        denominator_integral: den,
        quotient: num / den,
        exponent: 1.0,
        p: None,
    })
}

/// Bubble-weighted subcritical denominator integral
/// int |u|^p U^{2Q/(Q-2)-p}.
pub fn subcritical_denominator(
    rule: &BiradialRule,
    q: usize,
    u: &dyn BiradialField,
    p: f64,
) -> Result<f64> {
    let qf = q as f64;
    let wexp = 2.0 * qf / (qf - 2.0) - p;
    let bubble = bubble_biradial(q);
    integrate(rule, &|s: Jet, t: Jet| {
        let v = u.eval(s, t);
        let a = if v.v < 0.0 { -v } else { v };
        a.powf(p) * bubble.eval(s, t).powf(wexp)
    })
}

/// Subcritical quotient F_p for 2 <= p < 2Q/(Q-2).
pub fn subcritical_quotient(
    rule: &BiradialRule,
    q: usize,
    u: &dyn BiradialField,
    p: f64,
) -> Result<QuotientReport> {
    let qf = q as f64;
    let crit = 2.0 * qf / (qf - 2.0);
    if !(2.0..crit).contains(&p) {
        return Err(Error::Domain(format!(
            "subcritical exponent must satisfy 2 <= p < {crit}, got {p}"
        )));
    }
    let num = horizontal_energy(rule, u)?;
    let den_int = subcritical_denominator(rule, q, u, p)?;
    if den_int <= 0.0 {
        return Err(Error::Domain(
            "degenerate input: zero subcritical norm".into(),
        ));
    }
    let exponent = 2.0 / p;
    let den = den_int.powf(exponent);
    Ok(QuotientReport {
        name: "subcritical".into(),
        numerator: num,
        denominator: den,
        denominator_integral: den_int,
        quotient: num / den,
        exponent,
        p: Some(p),
    })
}

/// Moment integral int u^p U^{2Q/(Q-2)-p} omega_i (1-based i). For the
/// translation modes (i <= m+n) the integrand is odd while u is biradial,
/// so the value is exactly zero by parity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentValue {
    pub index: usize,
    pub value: f64,
    /// True when the zero is justified by parity rather than quadrature.
    pub by_parity: bool,
}

pub fn moment(
    rule: &BiradialRule,
    m: usize,
    n: usize,
    u: &dyn BiradialField,
    p: f64,
    i: usize,
) -> Result<MomentValue> {
    if i < 1 || i > m + n + 1 {
        return Err(Error::Domain(format!(
            "moment index must be in 1..={}, got {i}",
            m + n + 1
        )));
    }
    if i <= m + n {
        return Ok(MomentValue {
            index: i,
            value: 0.0,
            by_parity: true,
        });
    }
    let q = m + 2 * n;
    let qf = q as f64;
    let wexp = 2.0 * qf / (qf - 2.0) - p;
    let bubble = bubble_biradial(q);
    let omega = omega_dilation_biradial();
    let value = integrate(rule, &|s: Jet, t: Jet| {
        let v = u.eval(s, t);
        let a = if v.v < 0.0 { -v } else { v };
        a.powf(p) * bubble.eval(s, t).powf(wexp) * omega.eval(s, t)
    })?;
    Ok(MomentValue {
        index: i,
        value,
        by_parity: false,
    })
}

/// Energy-splitting identity check at (m, n) = (2, 1):
/// sum_i int |grad_G(u omega_i)|^2 = int |grad_G u|^2 + m int u^2 W.
///
/// The left side needs the non-biradial fields u omega_i, so it is computed
/// with the jet calculus on a dedicated (s, theta, t) tensor rule; the right
/// side comes from the biradial rule. Only the n_theta = single-angular-mode
/// geometry of (2, 1) is supported.
pub fn energy_splitting_check(
    rule: &BiradialRule,
    u: &dyn BiradialField,
    n_theta: usize,
) -> Result<CheckReport> {
    use crate::calculus::{horizontal_gradient, ScalarField};
    use crate::closedform::omega_field;
    use crate::group::GroupPoint;
    use crate::quadrature::lift_biradial;
    use crate::structure::construct_structure;

    if rule.m != 2 || rule.n != 1 {
        return Err(Error::Domain(
            "energy splitting check is implemented for (m, n) = (2, 1) only".into(),
        ));
    }
    let s = construct_structure(2, 1)?;
    let lifted = lift_biradial(u);
    let mut lhs_terms = Vec::new();
    let dtheta = 2.0 * std::f64::consts::PI / n_theta as f64;
    for i in 0..4 {
        let om = omega_field(&s, i);
        let field = |x: &[Jet], t: &[Jet]| lifted.eval(x, t) * om.eval(x, t);
        for (si, &sv) in rule.s_axis.s.iter().enumerate() {
            for k in 0..n_theta {
                let theta = dtheta * (k as f64 + 0.5);
                let x = vec![sv * theta.cos(), sv * theta.sin()];
                for (ti, &tv) in rule.tau_axis.s.iter().enumerate() {
                    for sign in [1.0, -1.0] {
                        let p = GroupPoint::new(x.clone(), vec![sign * tv]);
                        let g = horizontal_gradient(&s, &field, &p);
                        let g2: f64 = g.iter().map(|v| v * v).sum();
                        lhs_terms
                            .push(rule.s_axis.w[si] * dtheta * rule.tau_axis.w[ti] * g2);
                    }
                }
            }
        }
    }
    let lhs = crate::quadrature::compensated_sum(lhs_terms.into_iter());
    let energy = horizontal_energy(rule, u)?;
    let weight = hardy_weight_biradial();
    let hardy_term = integrate(rule, &|sj: Jet, tj: Jet| {
        let v = u.eval(sj, tj);
        v * v * weight.eval(sj, tj)
    })?;
    let rhs = energy + 2.0 * hardy_term;
    Ok(CheckReport::new("functionals.energy_splitting", lhs, rhs, 1e-300, 1e-4)
        .with_param("n_theta", n_theta))
}
