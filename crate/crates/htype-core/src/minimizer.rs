//! Subcritical minimization: normalized gradient descent for
//! Lambda_p = inf E(u) over non-negative biradial profiles with
//! int u^p U^{2Q/(Q-2)-p} = 1, tracking convergence to the bubble line.

use crate::closedform::{bubble_biradial, omega_dilation_biradial};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg::{backward_solve_t, cholesky, forward_solve, DMat};
use crate::quadrature::{BiradialField, BiradialRule};
use crate::report::CheckReport;
use crate::structure::HTypeStructure;
use serde::{Deserialize, Serialize};

/// Nodal collocation scaffold on the tensor quadrature grid: node weights,
/// physical coordinates, and bubble-gauged differentiation. Profiles are
/// differentiated through the product rule u = U * (u/U): the ratio is
/// handled by barycentric differentiation matrices in the compactified
/// variable and the bubble factor analytically. The gauge keeps the far
/// field accurate, where u varies on the bubble's anisotropic scales that
/// plain tensor interpolation cannot resolve.
pub struct Grid {
    pub ns: usize,
    pub nt: usize,
    pub s: Vec<f64>,
    pub tau: Vec<f64>,
    /// Flattened node weights (angular factor included), row-major in (s, tau).
    pub w: Vec<f64>,
    /// d/ds matrix acting on the s index of the gauged ratio.
    pub ds: Vec<f64>,
    /// d/dtau matrix acting on the tau index of the gauged ratio.
    pub dt: Vec<f64>,
    /// Bubble values at the nodes (the gauge reference).
    pub ub: Vec<f64>,
    /// d_s log U and d_tau log U at the nodes.
    lds: Vec<f64>,
    ldt: Vec<f64>,
    /// Compactified node coordinates and map scales, kept for resampling.
    rs: Vec<f64>,
    rt: Vec<f64>,
    sc_s: f64,
    sc_t: f64,
    q: usize,
}

/// Barycentric differentiation matrix for the given distinct nodes.
fn diff_matrix(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut bw = vec![1.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                bw[i] /= x[i] - x[j];
            }
        }
    }
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (bw[j] / bw[i]) / (x[i] - x[j]);
                d[i * n + j] = v;
                diag -= v;
            }
        }
        d[i * n + i] = diag;
    }
    d
}

// d/ds = diag((1 - r)^2 / c) * d/dr for s = c r / (1 - r).
fn physical_diff(r: &[f64], scale: f64) -> Vec<f64> {
    let n = r.len();
    let mut d = diff_matrix(r);
    for i in 0..n {
        let f = (1.0 - r[i]) * (1.0 - r[i]) / scale;
        for j in 0..n {
            d[i * n + j] *= f;
        }
    }
    d
}

impl Grid {
    /// Builds the scaffold and verifies the differentiation matrices against
    /// the analytic bubble derivatives; a run is only trusted past rel 1e-6.
    pub fn from_rule(rule: &BiradialRule, q: usize) -> Result<Grid> {
        let ns = rule.s_axis.s.len();
        let nt = rule.tau_axis.s.len();
        let mut w = vec![0.0; ns * nt];
        for i in 0..ns {
            for j in 0..nt {
                w[i * nt + j] = rule.angular * rule.s_axis.w[i] * rule.tau_axis.w[j];
            }
        }
        let bubble = bubble_biradial(q);
        let mut ub = vec![0.0; ns * nt];
        let mut lds = vec![0.0; ns * nt];
        let mut ldt = vec![0.0; ns * nt];
        for i in 0..ns {
            for j in 0..nt {
                let jet = bubble.eval(
                    Jet::var1(rule.s_axis.s[i]),
                    Jet::var2(rule.tau_axis.s[j]),
                );
                let idx = i * nt + j;
                ub[idx] = jet.v;
                lds[idx] = jet.d1 / jet.v;
                ldt[idx] = jet.d2 / jet.v;
            }
        }
        let grid = Grid {
            ns,
            nt,
            s: rule.s_axis.s.clone(),
            tau: rule.tau_axis.s.clone(),
            w,
            ds: physical_diff(&rule.s_axis.r, rule.s_axis.scale),
            dt: physical_diff(&rule.tau_axis.r, rule.tau_axis.scale),
            ub,
            lds,
            ldt,
            rs: rule.s_axis.r.clone(),
            rt: rule.tau_axis.r.clone(),
            sc_s: rule.s_axis.scale,
            sc_t: rule.tau_axis.scale,
            q,
        };
        // Trust gate: derivatives of a bubble times a smooth non-constant
        // factor must match the analytic jets; the bubble itself must be
        // reproduced at roundoff level.
        let probe = |s: Jet, tau: Jet| -> Jet {
            bubble.eval(s, tau) * ((-s - tau).exp() * 0.2 + 1.0)
        };
        let mut worst: f64 = 0.0;
        let mut scale_ref: f64 = 0.0;
        for check in [&probe as &dyn BiradialField, &bubble] {
            let ug = grid.sample(check);
            let (us, ut) = grid.derivatives(&ug);
            for i in 0..ns {
                for j in 0..nt {
                    let jet = check.eval(Jet::var1(grid.s[i]), Jet::var2(grid.tau[j]));
                    scale_ref = scale_ref.max(jet.d1.abs()).max(jet.d2.abs());
                    worst = worst
                        .max((us[i * nt + j] - jet.d1).abs())
                        .max((ut[i * nt + j] - jet.d2).abs());
                }
            }
        }
        let rel_err = worst / scale_ref;
        if !(rel_err <= 1e-6) {
            return Err(Error::GridDerivativeCheck { rel_err });
        }
        Ok(grid)
    }

    pub fn sample(&self, f: &dyn BiradialField) -> Vec<f64> {
        let mut v = vec![0.0; self.ns * self.nt];
        for i in 0..self.ns {
            for j in 0..self.nt {
                v[i * self.nt + j] = f.value(self.s[i], self.tau[j]);
            }
        }
        v
    }

    /// (u_s, u_tau) on the grid, via the gauge u = U v:
    /// u_s = U (D_s v) + (d_s log U) u.
    pub fn derivatives(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (ns, nt) = (self.ns, self.nt);
        let v: Vec<f64> = u.iter().zip(&self.ub).map(|(a, b)| a / b).collect();
        let mut us = vec![0.0; ns * nt];
        let mut ut = vec![0.0; ns * nt];
        for i in 0..ns {
            for k in 0..ns {
                let d = self.ds[i * ns + k];
                if d == 0.0 {
                    continue;
                }
                for j in 0..nt {
                    us[i * nt + j] += d * v[k * nt + j];
                }
            }
        }
        for i in 0..ns {
            for j in 0..nt {
                let mut acc = 0.0;
                for k in 0..nt {
                    acc += self.dt[j * nt + k] * v[i * nt + k];
                }
                ut[i * nt + j] = acc;
            }
        }
        for idx in 0..ns * nt {
            us[idx] = self.ub[idx] * us[idx] + self.lds[idx] * u[idx];
            ut[idx] = self.ub[idx] * ut[idx] + self.ldt[idx] * u[idx];
        }
        (us, ut)
    }

    /// Horizontal energy of a grid function.
    pub fn energy(&self, u: &[f64]) -> f64 {
        let (us, ut) = self.derivatives(u);
        self.energy_from(&us, &ut)
    }

    fn energy_from(&self, us: &[f64], ut: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.ns {
            let s2q = self.s[i] * self.s[i] / 4.0;
            for j in 0..self.nt {
                let idx = i * self.nt + j;
                acc += self.w[idx] * (us[idx] * us[idx] + s2q * ut[idx] * ut[idx]);
            }
        }
        acc
    }

    /// Energy bilinear form a(u, v).
    pub fn energy_pairing(&self, u: &[f64], v: &[f64]) -> f64 {
        let (us, ut) = self.derivatives(u);
        let (vs, vt) = self.derivatives(v);
        let mut acc = 0.0;
        for i in 0..self.ns {
            let s2q = self.s[i] * self.s[i] / 4.0;
            for j in 0..self.nt {
                let idx = i * self.nt + j;
                acc += self.w[idx] * (us[idx] * vs[idx] + s2q * ut[idx] * vt[idx]);
            }
        }
        acc
    }

    #[doc(hidden)]
    pub fn energy_gradient_public(&self, u: &[f64]) -> Vec<f64> {
        let (us, ut) = self.derivatives(u);
        self.energy_gradient(&us, &ut)
    }

    /// Gradient of the energy with respect to the node values (adjoint of
    /// the gauged derivative operators).
    fn energy_gradient(&self, us: &[f64], ut: &[f64]) -> Vec<f64> {
        let (ns, nt) = (self.ns, self.nt);
        let mut z1 = vec![0.0; ns * nt];
        let mut z2 = vec![0.0; ns * nt];
        for i in 0..ns {
            let s2q = self.s[i] * self.s[i] / 4.0;
            for j in 0..nt {
                let idx = i * nt + j;
                z1[idx] = 2.0 * self.w[idx] * us[idx];
                z2[idx] = 2.0 * self.w[idx] * s2q * ut[idx];
            }
        }
        let mut g = vec![0.0; ns * nt];
        // adjoint of u -> ub .* Ds(u ./ ub) + lds .* u
        for k in 0..ns {
            for i in 0..ns {
                let d = self.ds[i * ns + k];
                if d == 0.0 {
                    continue;
                }
                for j in 0..nt {
                    let idx = i * nt + j;
                    g[k * nt + j] += d * self.ub[idx] * z1[idx] / self.ub[k * nt + j];
                }
            }
        }
        // adjoint of u -> ub .* Dt(u ./ ub) + ldt .* u
        for i in 0..ns {
            for l in 0..nt {
                let mut acc = 0.0;
                for j in 0..nt {
                    let idx = i * nt + j;
                    acc += self.dt[j * nt + l] * self.ub[idx] * z2[idx];
                }
                g[i * nt + l] += acc / self.ub[i * nt + l];
            }
        }
        for idx in 0..ns * nt {
            g[idx] += self.lds[idx] * z1[idx] + self.ldt[idx] * z2[idx];
        }
        g
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimizeOpts {
    pub max_iters: usize,
    /// Stop when the Newton step predicts a relative energy decrease below
    /// this. The default matches the discretization floor of the default
    /// grids; tightening it buys nothing but iterations.
    pub tol: f64,
    /// Initial step, as a fraction of the constraint scale.
    pub step0: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Consecutive step rejections before declaring divergence.
    pub max_rejections: usize,
    /// Initial profile on the grid; defaults to the bubble.
    pub init: Option<Vec<f64>>,
}

impl Default for MinimizeOpts {
    fn default() -> Self {
        MinimizeOpts {
            max_iters: 300,
            tol: 1e-5,
            step0: 1.0,
            armijo: 1e-4,
            max_rejections: 60,
            init: None,
        }
    }
}

/// Converged subcritical minimizer with diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimizeResult {
    pub p: f64,
    /// Estimated Lambda_p (energy at the converged constrained profile).
    pub lambda_p: f64,
    /// Node values, row-major in (s, tau).
    pub profile: Vec<f64>,
    pub ns: usize,
    pub nt: usize,
    pub iterations: usize,
    pub energy_history: Vec<f64>,
    /// Coefficient of the bubble in the energy-orthogonal projection.
    pub lambda_coeff: f64,
    /// Energy of (profile - lambda_coeff * bubble).
    pub deviation: f64,
    /// Dilation-direction moment integral of the converged profile.
    pub moment_dilation: f64,
    /// |constraint - 1| at return.
    pub constraint_residual: f64,
}

struct Problem<'a> {
    grid: &'a Grid,
    p: f64,
    /// Bubble weight W^{2Q/(Q-2)-p} at the nodes.
    wpow: Vec<f64>,
    /// omega_{m+n+1} at the nodes.
    omega: Vec<f64>,
    ububble: Vec<f64>,
}

impl<'a> Problem<'a> {
    fn new(grid: &'a Grid, q: usize, p: f64) -> Problem<'a> {
        let qf = q as f64;
        let wexp = 2.0 * qf / (qf - 2.0) - p;
        let om = omega_dilation_biradial();
        let ubub = grid.ub.clone();
        let wpow = ubub.iter().map(|u| u.powf(wexp)).collect();
        Problem {
            grid,
            p,
            wpow,
            omega: grid.sample(&om),
            ububble: ubub,
        }
    }

    fn constraint(&self, u: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (idx, &v) in u.iter().enumerate() {
            acc += self.grid.w[idx] * v.abs().powf(self.p) * self.wpow[idx];
        }
        acc
    }

    fn constraint_gradient(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .enumerate()
            .map(|(idx, &v)| {
                self.p * self.grid.w[idx] * v.abs().powf(self.p - 1.0) * v.signum() * self.wpow[idx]
            })
            .collect()
    }

    fn normalize(&self, u: &mut [f64]) -> Result<f64> {
        let d = self.constraint(u);
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Domain(
                "degenerate profile: non-positive constraint integral".into(),
            ));
        }
        let f = d.powf(-1.0 / self.p);
        for v in u.iter_mut() {
            *v *= f;
        }
        Ok(d)
    }

    /// Scale-invariant objective E(u) / D(u)^{2/p}.
    fn objective(&self, u: &[f64]) -> f64 {
        self.grid.energy(u) / self.constraint(u).powf(2.0 / self.p)
    }

    fn moment(&self, u: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (idx, &v) in u.iter().enumerate() {
            acc += self.grid.w[idx] * v.abs().powf(self.p) * self.wpow[idx] * self.omega[idx];
        }
        acc
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Truncated Legendre tensor basis over the compactified coordinates,
/// gauged by the bubble: trial functions U * P_a(x_s) P_b(x_tau) with
/// x = 2r - 1. Keeping the polynomial degree well below the quadrature
/// exactness bound removes the aliasing modes a nodal minimization can
/// exploit to underestimate the energy.
struct Modal {
    ms: usize,
    mt: usize,
    /// P_a(x_s_i), row-major ns x ms.
    ps: Vec<f64>,
    /// P_b(x_tau_j), row-major nt x mt.
    pt: Vec<f64>,
}

fn legendre_row(m: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; m];
    p[0] = 1.0;
    if m > 1 {
        p[1] = x;
    }
    for k in 1..m.saturating_sub(1) {
        p[k + 1] = ((2 * k + 1) as f64 * x * p[k] - k as f64 * p[k - 1]) / (k + 1) as f64;
    }
    p
}

impl Modal {
    fn new(grid: &Grid, ms: usize, mt: usize) -> Modal {
        let mut ps = vec![0.0; grid.ns * ms];
        for i in 0..grid.ns {
            ps[i * ms..(i + 1) * ms].copy_from_slice(&legendre_row(ms, 2.0 * grid.rs[i] - 1.0));
        }
        let mut pt = vec![0.0; grid.nt * mt];
        for j in 0..grid.nt {
            pt[j * mt..(j + 1) * mt].copy_from_slice(&legendre_row(mt, 2.0 * grid.rt[j] - 1.0));
        }
        Modal { ms, mt, ps, pt }
    }

    /// Nodal profile from modal coefficients: u = U * (Ps C Pt^T).
    fn synth(&self, grid: &Grid, c: &[f64]) -> Vec<f64> {
        let (ns, nt, ms, mt) = (grid.ns, grid.nt, self.ms, self.mt);
        let mut tmp = vec![0.0; ms * nt];
        for a in 0..ms {
            for j in 0..nt {
                let mut acc = 0.0;
                for b in 0..mt {
                    acc += c[a * mt + b] * self.pt[j * mt + b];
                }
                tmp[a * nt + j] = acc;
            }
        }
        let mut u = vec![0.0; ns * nt];
        for i in 0..ns {
            for j in 0..nt {
                let mut acc = 0.0;
                for a in 0..ms {
                    acc += self.ps[i * ms + a] * tmp[a * nt + j];
                }
                u[i * nt + j] = grid.ub[i * nt + j] * acc;
            }
        }
        u
    }

    /// Adjoint of synth: modal covector from a nodal covector.
    fn pull(&self, grid: &Grid, y: &[f64]) -> Vec<f64> {
        let (ns, nt, ms, mt) = (grid.ns, grid.nt, self.ms, self.mt);
        let mut tmp = vec![0.0; ms * nt];
        for i in 0..ns {
            for j in 0..nt {
                let yb = grid.ub[i * nt + j] * y[i * nt + j];
                for a in 0..ms {
                    tmp[a * nt + j] += self.ps[i * ms + a] * yb;
                }
            }
        }
        let mut g = vec![0.0; ms * mt];
        for a in 0..ms {
            for j in 0..nt {
                let t = tmp[a * nt + j];
                if t == 0.0 {
                    continue;
                }
                for b in 0..mt {
                    g[a * mt + b] += t * self.pt[j * mt + b];
                }
            }
        }
        g
    }

    /// Least-squares projection of a nodal profile onto the basis in the
    /// energy + mass inner product. The gradient term keeps the fit tame
    /// in the far field, where the mass weight alone would let the
    /// polynomial factor run wild.
    fn project(&self, grid: &Grid, u0: &[f64]) -> Result<Vec<f64>> {
        let dd: Vec<f64> = grid.w.clone();
        let gram = assemble_modal(grid, self, &dd, None, true);
        let l = cholesky(&gram)?;
        let ge = grid.energy_gradient_public(u0);
        let wy: Vec<f64> = grid
            .w
            .iter()
            .zip(u0)
            .zip(&ge)
            .map(|((w, v), g)| w * v + g)
            .collect();
        let mut rhs = self.pull(grid, &wy);
        forward_solve(&l, &mut rhs);
        backward_solve_t(&l, &mut rhs);
        Ok(rhs)
    }
}

/// Modal Gram/metric assembly: congruence of
/// [2K if with_stiffness] + diag(dd / (U U)) [+ rho n n^T]
/// with the synthesis map, exploiting that both K and the diagonal are
/// block structured over the tensor axes. dd is a plain nodal diagonal
/// applied to nodal values (the gauge factors are inside the congruence).
fn assemble_modal(
    grid: &Grid,
    modal: &Modal,
    dd: &[f64],
    normal_rho: Option<(&[f64], f64)>,
    with_stiffness: bool,
) -> DMat {
    let (ns, nt, ms, mt) = (grid.ns, grid.nt, modal.ms, modal.mt);
    let m = ms * mt;
    let mut h = DMat::zeros(m);

    // s-direction blocks plus the nodal diagonal, per tau column j:
    // A_j = Ps^T (2 B^T W B * [stiffness] + diag(dd(:, j))/U^2-gauge) Ps,
    // where B is the gauged d/ds operator with the U factors; working on
    // coefficients means B includes U, so the diagonal enters as dd * U^2
    // over the ratio variable. Assemble in the nodal-u frame instead:
    // columns of Ps are lifted through diag(U(:, j)).
    let mut aall = vec![0.0; nt * ms * ms];
    let mut b = vec![0.0; ns * ns];
    let mut t = vec![0.0; ns * ns];
    let mut psu = vec![0.0; ns * ms];
    let mut tp = vec![0.0; ns * ms];
    for j in 0..nt {
        t.iter_mut().for_each(|v| *v = 0.0);
        if with_stiffness {
            for i in 0..ns {
                for k in 0..ns {
                    let mut v = grid.ub[i * nt + j] * grid.ds[i * ns + k] / grid.ub[k * nt + j];
                    if i == k {
                        v += grid.lds[i * nt + j];
                    }
                    b[i * ns + k] = v;
                }
            }
            for i in 0..ns {
                for k in 0..=i {
                    let mut acc = 0.0;
                    for r in 0..ns {
                        acc += grid.w[r * nt + j] * b[r * ns + i] * b[r * ns + k];
                    }
                    let v = 2.0 * acc;
                    t[i * ns + k] = v;
                    t[k * ns + i] = v;
                }
            }
        }
        for i in 0..ns {
            t[i * ns + i] += dd[i * nt + j];
        }
        // lift the basis through the gauge: column a of the nodal map is
        // U(:, j) .* Ps(:, a)
        for i in 0..ns {
            for a in 0..ms {
                psu[i * ms + a] = grid.ub[i * nt + j] * modal.ps[i * ms + a];
            }
        }
        for i in 0..ns {
            for a in 0..ms {
                let mut acc = 0.0;
                for k in 0..ns {
                    acc += t[i * ns + k] * psu[k * ms + a];
                }
                tp[i * ms + a] = acc;
            }
        }
        let aj = &mut aall[j * ms * ms..(j + 1) * ms * ms];
        for a in 0..ms {
            for a2 in 0..=a {
                let mut acc = 0.0;
                for i in 0..ns {
                    acc += psu[i * ms + a] * tp[i * ms + a2];
                }
                aj[a * ms + a2] = acc;
                aj[a2 * ms + a] = acc;
            }
        }
    }
    for a in 0..ms {
        for a2 in 0..=a {
            // R[b, b2] = sum_j A_j[a, a2] pt[j, b] pt[j, b2]
            let mut r = vec![0.0; mt * mt];
            for j in 0..nt {
                let q = aall[j * ms * ms + a * ms + a2];
                if q == 0.0 {
                    continue;
                }
                for bb in 0..mt {
                    let f = q * modal.pt[j * mt + bb];
                    for b2 in 0..=bb {
                        r[bb * mt + b2] += f * modal.pt[j * mt + b2];
                    }
                }
            }
            for bb in 0..mt {
                for b2 in 0..=bb {
                    let v = r[bb * mt + b2];
                    h[(a * mt + bb, a2 * mt + b2)] += v;
                    if bb != b2 {
                        h[(a * mt + b2, a2 * mt + bb)] += v;
                    }
                }
            }
        }
    }

    if with_stiffness {
        // tau-direction blocks per s row i
        let mut call = vec![0.0; ns * mt * mt];
        let mut b = vec![0.0; nt * nt];
        let mut t = vec![0.0; nt * nt];
        let mut ptu = vec![0.0; nt * mt];
        let mut tp = vec![0.0; nt * mt];
        for i in 0..ns {
            let s2q = grid.s[i] * grid.s[i] / 4.0;
            for cidx in 0..nt {
                for j in 0..nt {
                    let mut v = grid.ub[i * nt + cidx] * grid.dt[cidx * nt + j] / grid.ub[i * nt + j];
                    if j == cidx {
                        v += grid.ldt[i * nt + cidx];
                    }
                    b[cidx * nt + j] = v;
                }
            }
            for j in 0..nt {
                for c2 in 0..=j {
                    let mut acc = 0.0;
                    for r in 0..nt {
                        acc += grid.w[i * nt + r] * s2q * b[r * nt + j] * b[r * nt + c2];
                    }
                    let v = 2.0 * acc;
                    t[j * nt + c2] = v;
                    t[c2 * nt + j] = v;
                }
            }
            for j in 0..nt {
                for bb in 0..mt {
                    ptu[j * mt + bb] = grid.ub[i * nt + j] * modal.pt[j * mt + bb];
                }
            }
            for j in 0..nt {
                for bb in 0..mt {
                    let mut acc = 0.0;
                    for k in 0..nt {
                        acc += t[j * nt + k] * ptu[k * mt + bb];
                    }
                    tp[j * mt + bb] = acc;
                }
            }
            let ci = &mut call[i * mt * mt..(i + 1) * mt * mt];
            for bb in 0..mt {
                for b2 in 0..=bb {
                    let mut acc = 0.0;
                    for j in 0..nt {
                        acc += ptu[j * mt + bb] * tp[j * mt + b2];
                    }
                    ci[bb * mt + b2] = acc;
                    ci[b2 * mt + bb] = acc;
                }
            }
        }
        for bb in 0..mt {
            for b2 in 0..=bb {
                let mut r = vec![0.0; ms * ms];
                for i in 0..ns {
                    let q = call[i * mt * mt + bb * mt + b2];
                    if q == 0.0 {
                        continue;
                    }
                    for a in 0..ms {
                        let f = q * modal.ps[i * ms + a];
                        for a2 in 0..=a {
                            r[a * ms + a2] += f * modal.ps[i * ms + a2];
                        }
                    }
                }
                for a in 0..ms {
                    for a2 in 0..=a {
                        let v = r[a * ms + a2];
                        h[(a * mt + bb, a2 * mt + b2)] += v;
                        if bb != b2 {
                            h[(a * mt + b2, a2 * mt + bb)] += v;
                        }
                    }
                }
            }
        }
    }

    // mirror to the upper triangle
    for p in 0..m {
        for q in 0..p {
            let v = h[(p, q)];
            h[(q, p)] = v;
        }
    }

    if let Some((normal, rho)) = normal_rho {
        let nc = modal.pull(grid, normal);
        for p in 0..m {
            for q in 0..m {
                h[(p, q)] += rho * nc[p] * nc[q];
            }
        }
    }
    h
}

fn bary_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut bw = vec![1.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                bw[i] /= x[i] - x[j];
            }
        }
    }
    bw
}

/// Row of interpolation coefficients for evaluating at xq (sums to one).
fn bary_row(x: &[f64], bw: &[f64], xq: f64) -> Vec<f64> {
    let n = x.len();
    for i in 0..n {
        if xq == x[i] {
            let mut row = vec![0.0; n];
            row[i] = 1.0;
            return row;
        }
    }
    let mut row: Vec<f64> = (0..n).map(|i| bw[i] / (xq - x[i])).collect();
    let sum: f64 = row.iter().sum();
    for v in row.iter_mut() {
        *v /= sum;
    }
    row
}

/// Resample the dilation u_lam(s, tau) = lam^{(Q-2)/2} u(lam s, lam^2 tau)
/// onto the grid, interpolating the gauged ratio u/U in the compactified
/// coordinates and carrying the bubble factor analytically.
fn dilate_profile(grid: &Grid, u: &[f64], lam: f64) -> Vec<f64> {
    let (ns, nt) = (grid.ns, grid.nt);
    let v: Vec<f64> = u.iter().zip(&grid.ub).map(|(a, b)| a / b).collect();
    let bubble = bubble_biradial(grid.q);
    let bws = bary_weights(&grid.rs);
    let bwt = bary_weights(&grid.rt);
    let half = 0.5 * (grid.q as f64 - 2.0);
    // contract the s index first, then the tau index
    let mut tmp = vec![0.0; ns * nt];
    let mut sp = vec![0.0; ns];
    for i in 0..ns {
        sp[i] = lam * grid.s[i];
        let row = bary_row(&grid.rs, &bws, sp[i] / (sp[i] + grid.sc_s));
        for (k, c) in row.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            for j in 0..nt {
                tmp[i * nt + j] += c * v[k * nt + j];
            }
        }
    }
    let mut out = vec![0.0; ns * nt];
    for j in 0..nt {
        let tp = lam * lam * grid.tau[j];
        let row = bary_row(&grid.rt, &bwt, tp / (tp + grid.sc_t));
        for i in 0..ns {
            let mut acc = 0.0;
            for (l, c) in row.iter().enumerate() {
                acc += c * tmp[i * nt + l];
            }
            out[i * nt + j] = (lam.powf(half) * bubble.value(sp[i], tp) * acc).max(0.0);
        }
    }
    out
}

/// Dilation normalization of a converged profile: pick the scale of the
/// minimizing family for which the dilation moment vanishes, the same
/// normalization freedom the continuum problem fixes by moment zero. The
/// objective is scale-invariant, so this costs only the (tiny) curvature
/// of the discrete valley.
fn recenter_dilation(grid: &Grid, prob: &Problem, u: &mut Vec<f64>, e: &mut f64) {
    let eval = |lam: f64| -> Option<f64> {
        let mut c = dilate_profile(grid, u, lam);
        prob.normalize(&mut c).ok()?;
        Some(prob.moment(&c))
    };
    let m0 = prob.moment(u);
    if m0.abs() <= 1e-14 {
        return;
    }
    let mut bracket = None;
    for d in [1e-3, 3e-3, 1e-2, 3e-2, 1e-1] {
        for lam in [1.0 + d, 1.0 - d] {
            if let Some(m) = eval(lam) {
                if m * m0 < 0.0 {
                    bracket = Some((1.0f64.min(lam), 1.0f64.max(lam)));
                    break;
                }
            }
        }
        if bracket.is_some() {
            break;
        }
    }
    let Some((mut lo, mut hi)) = bracket else {
        return;
    };
    let mlo = if lo == 1.0 { m0 } else { eval(lo).unwrap_or(0.0) };
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        match eval(mid) {
            Some(m) => {
                if m * mlo <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            None => return,
        }
    }
    let lam = 0.5 * (lo + hi);
    let mut c = dilate_profile(grid, u, lam);
    if prob.normalize(&mut c).is_ok() {
        *u = c;
        *e = grid.energy(u);
    }
}

/// Constrained Newton minimization of F_p over the bubble-gauged modal
/// space, normalized to the constraint surface D = 1 each step. The metric
/// is the Lagrangian Hessian of (E, D = 1) plus a penalty along the
/// constraint normal (the radial scaling mode has negative Lagrangian
/// curvature for p > 2), factored densely in modal coordinates. The final
/// profile is recentered in the dilation scale so the dilation moment
/// vanishes, the same normalization freedom the continuum problem fixes.
pub fn minimize_subcritical(
    s: &HTypeStructure,
    p: f64,
    rule: &BiradialRule,
    opts: &MinimizeOpts,
) -> Result<MinimizeResult> {
    let q = s.q();
    let qf = q as f64;
    let crit = 2.0 * qf / (qf - 2.0);
    if !(2.0..crit).contains(&p) {
        return Err(Error::Domain(format!(
            "subcritical exponent must satisfy 2 <= p < {crit}, got {p}"
        )));
    }
    let grid = Grid::from_rule(rule, q)?;
    let prob = Problem::new(&grid, q, p);
    // polynomial degree well below the quadrature exactness bound so that
    // the discrete energy of every representable profile is trustworthy
    let mdeg = ((5 * grid.ns.min(grid.nt)) / 8).clamp(8, 44);
    let modal = Modal::new(&grid, mdeg, mdeg);
    let m = mdeg * mdeg;

    let mut c = vec![0.0; m];
    match &opts.init {
        Some(v) => {
            if v.len() != grid.ns * grid.nt {
                return Err(Error::Domain(format!(
                    "initial profile has {} values, grid has {}",
                    v.len(),
                    grid.ns * grid.nt
                )));
            }
            c = modal.project(&grid, v)?;
        }
        None => c[0] = 1.0,
    }
    let mut u = modal.synth(&grid, &c);
    {
        let d = prob.constraint(&u);
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Domain(
                "degenerate profile: non-positive constraint integral".into(),
            ));
        }
        let f = d.powf(-1.0 / p);
        c.iter_mut().for_each(|x| *x *= f);
        u.iter_mut().for_each(|x| *x *= f);
    }

    let mut e = grid.energy(&u);
    let mut energy_history = vec![e];
    let mut iterations = 0;
    let mut converged = false;
    // floor detection: once the predicted decrease saturates above the
    // nominal threshold the discretization floor is reached
    let mut best_pred = f64::INFINITY;
    let mut best_it = 0usize;

    for it in 0..opts.max_iters {
        iterations = it + 1;
        let (us, ut) = grid.derivatives(&u);
        let ge = grid.energy_gradient(&us, &ut);
        let gd = prob.constraint_gradient(&u);
        // gradient of F_p on the constraint surface (D = 1)
        let gu: Vec<f64> = ge
            .iter()
            .zip(&gd)
            .map(|(a, b)| a - 2.0 * e / p * b)
            .collect();
        let g = modal.pull(&grid, &gu);

        // Lagrangian Hessian: 2K - 2E(p-1) diag(w wpow |u|^{p-2}) with the
        // normal penalty; a small w-diagonal shift keeps the factorization
        // alive away from the minimizer, escalated if it is not enough
        let mass: Vec<f64> = u
            .iter()
            .enumerate()
            .map(|(i, &v)| 2.0 * e * (p - 1.0) * grid.w[i] * prob.wpow[i] * v.abs().powf(p - 2.0))
            .collect();
        let mut sig = 1e-6;
        let mut factor = None;
        for _ in 0..4 {
            let dd: Vec<f64> = grid
                .w
                .iter()
                .zip(&mass)
                .map(|(w, ms)| sig * w - ms)
                .collect();
            let h = assemble_modal(&grid, &modal, &dd, Some((&gd, 2.0 * e)), true);
            match cholesky(&h) {
                Ok(l) => {
                    factor = Some(l);
                    break;
                }
                Err(_) => sig *= 100.0,
            }
        }
        let Some(l) = factor else {
            return Err(Error::NonConvergence(format!(
                "metric factorization failed at iteration {iterations}"
            )));
        };
        let mut dir = g.clone();
        forward_solve(&l, &mut dir);
        backward_solve_t(&l, &mut dir);

        // near the minimum the objective excess is about half the predicted
        // decrease g . dir of the Newton step, so this is the stop test
        let pred_full = dot(&g, &dir);
        if pred_full < 0.5 * best_pred {
            best_pred = pred_full;
            best_it = it;
        }
        let stalled = it >= best_it + 6 && pred_full <= 1e-6 * e.abs();
        if pred_full <= opts.tol.max(1e-15) * e.abs() || stalled {
            converged = true;
            break;
        }
        if pred_full <= 0.0 {
            if pred_full.abs() <= 1e-10 * e.abs() {
                converged = true;
                break;
            }
            return Err(Error::NonConvergence(format!(
                "metric solve produced a non-descent direction at iteration {iterations}"
            )));
        }

        let mut accepted = false;
        let mut alpha = opts.step0;
        for _ in 0..opts.max_rejections {
            let cand_c: Vec<f64> = c
                .iter()
                .zip(&dir)
                .map(|(v, di)| v - alpha * di)
                .collect();
            let mut cand = modal.synth(&grid, &cand_c);
            let d = prob.constraint(&cand);
            if !(d > 0.0) || !d.is_finite() {
                alpha *= 0.5;
                continue;
            }
            let f = d.powf(-1.0 / p);
            cand.iter_mut().for_each(|x| *x *= f);
            let ec = grid.energy(&cand);
            if ec <= e - opts.armijo * alpha * pred_full {
                c = cand_c.iter().map(|x| x * f).collect();
                u = cand;
                e = ec;
                energy_history.push(e);
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // flat to within the Armijo resolution: the remaining predicted
            // decrease is below what the arithmetic can realize
            if pred_full <= 1e-8 * e.abs() {
                converged = true;
                break;
            }
            return Err(Error::NonConvergence(format!(
                "step rejected {} times at iteration {} (energy {e})",
                opts.max_rejections, iterations
            )));
        }
    }
    if !converged {
        return Err(Error::NonConvergence(format!(
            "no convergence in {} iterations (energy {e})",
            opts.max_iters
        )));
    }

    // the converged profile is non-negative up to far-field roundoff
    for v in u.iter_mut() {
        *v = v.max(0.0);
    }
    prob.normalize(&mut u)?;
    e = grid.energy(&u);
    recenter_dilation(&grid, &prob, &mut u, &mut e);

    let a_uu = grid.energy_pairing(&prob.ububble, &prob.ububble);
    let a_ub = grid.energy_pairing(&u, &prob.ububble);
    let lambda_coeff = a_ub / a_uu;
    let diff: Vec<f64> = u
        .iter()
        .zip(&prob.ububble)
        .map(|(a, b)| a - lambda_coeff * b)
        .collect();
    let deviation = grid.energy(&diff);
    let moment_dilation = prob.moment(&u);
    let constraint_residual = (prob.constraint(&u) - 1.0).abs();

    Ok(MinimizeResult {
        p,
        lambda_p: e,
        profile: u,
        ns: grid.ns,
        nt: grid.nt,
        iterations,
        energy_history,
        lambda_coeff,
        deviation,
        moment_dilation,
        constraint_residual,
    })
}

pub fn sweep_p(
    s: &HTypeStructure,
    p_list: &[f64],
    rule: &BiradialRule,
    opts: &MinimizeOpts,
) -> Result<Vec<MinimizeResult>> {
    if p_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("p list must be strictly ascending".into()));
    }
    let mut out = Vec::with_capacity(p_list.len());
    let mut o = opts.clone();
    for &p in p_list {
        let r = minimize_subcritical(s, p, rule, &o)?;
        o.init = Some(r.profile.clone());
        out.push(r);
    }
    Ok(out)
}

/// Dilation-direction moment check for a converged run.
pub fn moment_check(result: &MinimizeResult) -> CheckReport {
    CheckReport::new(
        "minimizer.moment_dilation",
        result.moment_dilation,
        0.0,
        1e-5,
        0.0,
    )
    .with_param("p", result.p)
}

/// Curvature of F_p at the converged profile along u * omega_{m+n+1},
/// by a symmetric three-point probe. Non-negative at a minimum.
pub fn second_variation_probe(
    s: &HTypeStructure,
    rule: &BiradialRule,
    result: &MinimizeResult,
    h: f64,
) -> Result<f64> {
    let q = s.q();
    let grid = Grid::from_rule(rule, q)?;
    let prob = Problem::new(&grid, q, result.p);
    let dir: Vec<f64> = result
        .profile
        .iter()
        .zip(&prob.omega)
        .map(|(u, w)| u * w)
        .collect();
    let at = |eps: f64| -> f64 {
        let v: Vec<f64> = result
            .profile
            .iter()
            .zip(&dir)
            .map(|(u, d)| u + eps * d)
            .collect();
        prob.objective(&v)
    };
    let (f0, fp, fm) = (at(0.0), at(h), at(-h));
    Ok((fp + fm - 2.0 * f0) / (h * h))
}
