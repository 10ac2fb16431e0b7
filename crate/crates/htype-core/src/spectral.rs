//! Rayleigh-Ritz approximation of the weighted eigenvalue problem
//! -Delta_G v = mu U^{4/(Q-2)} v in the biradial sector, recovering the two
//! lowest eigenvalues m(Q-2)/4 and m(Q+2)/4.

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg::{cholesky, jacobi_eigen, DMat};
use crate::quadrature::{make_rule, BiradialRule};
use crate::structure::HTypeStructure;
use serde::{Deserialize, Serialize};

pub use crate::linalg::solve_gevp;

/// Bubble-weighted polynomial trial space: phi_k = U_lambda(s, tau) *
/// P_a(2 zeta - 1) * P_b(4 chi - 1) with zeta = A/D in (0,1], chi = tau'/D
/// in [0,1/2], where A = 1 + |lambda s|^2/4, tau' = lambda^2 tau,
/// D = A^2 + tau'^2, and Legendre P. These bounded coordinates are adapted
/// to the bubble: the dilation mode (2A/D - 1) U is exactly the (1,0)
/// member, so the second eigenfunction lies in the span from degree 1 on.
/// Pairs (a, b) are graded by total degree; the first function is U_lambda.
#[derive(Debug, Clone)]
pub struct GalerkinBasis {
    pub q: usize,
    pub pairs: Vec<(usize, usize)>,
    /// Dilation applied to the bubble weight and the coordinates alike.
    pub lambda: f64,
}

fn legendre(n: usize, x: Jet) -> Jet {
    match n {
        0 => Jet::c(1.0),
        1 => x,
        _ => {
            let mut p0 = Jet::c(1.0);
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = (x * p1 * (2.0 * kf - 1.0) - p0 * (kf - 1.0)) / kf;
                p0 = p1;
                p1 = p2;
            }
            p1
        }
    }
}

impl GalerkinBasis {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Dilated bubble lambda^{(Q-2)/2} U(lambda s, lambda^2 tau).
    fn bubble(&self, s: Jet, tau: Jet) -> Jet {
        let e = -((self.q as f64) - 2.0) / 4.0;
        let ss = s * self.lambda;
        let tt = tau * (self.lambda * self.lambda);
        let a = ss * ss * 0.25 + 1.0;
        (a * a + tt * tt).powf(e) * self.lambda.powf((self.q as f64 - 2.0) / 2.0)
    }

    pub fn eval(&self, k: usize, s: Jet, tau: Jet) -> Jet {
        let (a, b) = self.pairs[k];
        let ss = s * self.lambda;
        let tt = tau * (self.lambda * self.lambda);
        let aa = ss * ss * 0.25 + 1.0;
        let d = aa * aa + tt * tt;
        let zeta = aa / d;
        let chi = tt / d;
        self.bubble(s, tau) * legendre(a, zeta * 2.0 - 1.0) * legendre(b, chi * 4.0 - 1.0)
    }

    /// Weight U_lambda^{4/(Q-2)} of the mass form.
    pub fn weight(&self, s: Jet, tau: Jet) -> Jet {
        let ss = s * self.lambda;
        let tt = tau * (self.lambda * self.lambda);
        let a = ss * ss * 0.25 + 1.0;
        (a * a + tt * tt).recip() * (self.lambda * self.lambda)
    }
}

/// First k degree-graded pairs over the given structure's bubble.
pub fn default_basis(s: &HTypeStructure, k: usize) -> Result<GalerkinBasis> {
    default_basis_scaled(s, k, 1.0)
}

pub fn default_basis_scaled(s: &HTypeStructure, k: usize, lambda: f64) -> Result<GalerkinBasis> {
    if k < 1 {
        return Err(Error::Domain("basis size must be >= 1".into()));
    }
    if !(lambda > 0.0) {
        return Err(Error::Domain("basis dilation must be positive".into()));
    }
    let mut pairs = Vec::with_capacity(k);
    let mut deg = 0;
    'outer: loop {
        for a in (0..=deg).rev() {
            pairs.push((a, deg - a));
            if pairs.len() == k {
                break 'outer;
            }
        }
        deg += 1;
    }
    Ok(GalerkinBasis {
        q: s.q(),
        pairs,
        lambda,
    })
}

/// Stiffness A_{kl} = int <grad_G phi_k, grad_G phi_l> and mass
/// B_{kl} = int U^{4/(Q-2)} phi_k phi_l over the rule. Both exactly
/// symmetric by construction (upper triangle mirrored).
pub fn assemble(rule: &BiradialRule, basis: &GalerkinBasis) -> Result<(DMat, DMat)> {
    let k = basis.len();
    let mut a = DMat::zeros(k);
    let mut b = DMat::zeros(k);
    let mut vals = vec![0.0; k];
    let mut ds = vec![0.0; k];
    let mut dt = vec![0.0; k];
    for (i, &si) in rule.s_axis.s.iter().enumerate() {
        for (j, &tj) in rule.tau_axis.s.iter().enumerate() {
            let wq = rule.angular * rule.s_axis.w[i] * rule.tau_axis.w[j];
            let sjet = Jet::var1(si);
            let tjet = Jet::var2(tj);
            for kk in 0..k {
                let phi = basis.eval(kk, sjet, tjet);
                vals[kk] = phi.v;
                ds[kk] = phi.d1;
                dt[kk] = phi.d2;
            }
            let w = basis.weight(Jet::c(si), Jet::c(tj)).v;
            let s2q = si * si / 4.0;
            for p in 0..k {
                for q in p..k {
                    a[(p, q)] += wq * (ds[p] * ds[q] + s2q * dt[p] * dt[q]);
                    b[(p, q)] += wq * w * vals[p] * vals[q];
                }
            }
        }
    }
    for p in 0..k {
        for q in p..k {
            if !a[(p, q)].is_finite() || !b[(p, q)].is_finite() {
                return Err(Error::Assembly { row: p, col: q });
            }
            a[(q, p)] = a[(p, q)];
            b[(q, p)] = b[(p, q)];
        }
    }
    Ok((a, b))
}

/// Galerkin spectrum with residual diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub k: usize,
    pub nodes: usize,
    /// Condition number of the mass matrix.
    pub mass_condition: f64,
    /// Weighted-norm mass of the lowest eigenvector off its first
    /// (bubble) coefficient.
    pub off_bubble_mass: f64,
    /// |v1^T B v2| and |v1^T A v2| for the two lowest eigenvectors.
    pub cross_mass: f64,
    pub cross_stiffness: f64,
    /// Number of eigenvalues within 1% of the second one (diagnostic only;
    /// the true multiplicity is not claimed).
    pub second_cluster_size: usize,
}

pub fn spectrum(s: &HTypeStructure, k: usize, nodes: usize) -> Result<SpectrumResult> {
    spectrum_scaled(s, k, nodes, 2.0, 1.0)
}

pub fn spectrum_scaled(
    s: &HTypeStructure,
    k: usize,
    nodes: usize,
    scale: f64,
    lambda: f64,
) -> Result<SpectrumResult> {
    if k < 2 {
        return Err(Error::Domain("spectrum needs basis size >= 2".into()));
    }
    let rule = make_rule(s.m, s.n, nodes, scale)?;
    let basis = default_basis_scaled(s, k, lambda)?;
    let (a, b) = assemble(&rule, &basis)?;
    let (bvals, _) = jacobi_eigen(&b);
    let cond = bvals[k - 1] / bvals[0];
    if !(cond.is_finite()) || cond >= 1e12 || bvals[0] <= 0.0 {
        return Err(Error::Conditioning { cond });
    }
    let (vals, vecs) = solve_gevp(&a, &b)?;
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergence(
            "eigensolver produced non-finite values".into(),
        ));
    }
    // off-bubble mass of the ground eigenvector in the B norm
    let quad = |m: &DMat, x: &[f64], y: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..k {
            for j in 0..k {
                acc += x[i] * m[(i, j)] * y[j];
            }
        }
        acc
    };
    let v1: Vec<f64> = (0..k).map(|i| vecs[(i, 0)]).collect();
    let v2: Vec<f64> = (0..k).map(|i| vecs[(i, 1)]).collect();
    let mut v1_off = v1.clone();
    v1_off[0] = 0.0;
    let off_bubble_mass = quad(&b, &v1_off, &v1_off) / quad(&b, &v1, &v1);
    let cross_mass = quad(&b, &v1, &v2).abs();
    let cross_stiffness = quad(&a, &v1, &v2).abs();
    let mu2 = vals[1];
    let second_cluster_size = vals
        .iter()
        .filter(|&&v| (v - mu2).abs() <= 0.01 * mu2.abs())
        .count();
    Ok(SpectrumResult {
        eigenvalues: vals,
        k,
        nodes,
        mass_condition: cond,
        off_bubble_mass,
        cross_mass,
        cross_stiffness,
        second_cluster_size,
    })
}

/// Relative residual of projecting f onto the basis span in the weighted
/// norm: sqrt(1 - g^T B^{-1} g / ||f||^2). Diagnostic for whether a target
/// function is representable.
pub fn projection_residual(
    rule: &BiradialRule,
    basis: &GalerkinBasis,
    f: &dyn crate::quadrature::BiradialField,
) -> Result<f64> {
    use crate::quadrature::integrate;
    let k = basis.len();
    let (_, b) = assemble(rule, basis)?;
    let mut g = vec![0.0; k];
    for (kk, gk) in g.iter_mut().enumerate() {
        *gk = integrate(rule, &|s: Jet, t: Jet| {
            basis.weight(s, t) * basis.eval(kk, s, t) * f.eval(s, t)
        })?;
    }
    let norm2 = integrate(rule, &|s: Jet, t: Jet| {
        let fv = f.eval(s, t);
        basis.weight(s, t) * fv * fv
    })?;
    // solve B y = g through the Cholesky factor
    let l = cholesky(&b)?;
    let mut y = g.clone();
    // forward then backward substitution against L L^T
    for i in 0..k {
        let mut v = y[i];
        for j in 0..i {
            v -= l[(i, j)] * y[j];
        }
        y[i] = v / l[(i, i)];
    }
    for i in (0..k).rev() {
        let mut v = y[i];
        for j in (i + 1)..k {
            v -= l[(j, i)] * y[j];
        }
        y[i] = v / l[(i, i)];
    }
    let fitted: f64 = g.iter().zip(&y).map(|(gi, yi)| gi * yi).sum();
    Ok(((norm2 - fitted).max(0.0) / norm2).sqrt())
}
