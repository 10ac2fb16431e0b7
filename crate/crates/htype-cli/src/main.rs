//! Batch runner: every verification and computation in the library behind
//! one binary, emitting JSON-lines reports. Exit code 0 means all checks
//! passed, 1 means at least one failed, 2 is a usage or configuration
//! error, 3 a numerical non-convergence.

use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use htype_core::calculus::{horizontal_gradient, sublaplacian};
use htype_core::closedform::{
    bubble, bubble_biradial, sum_of_squares_check, omega_all, omega_dilation_biradial,
    parameter_derivatives, yamabe_residual, BubbleParams,
};
use htype_core::error::Error;
use htype_core::functionals::{fs_quotient, hardy_quotient, sharp_constant};
use htype_core::group::{hom_norm, GroupPoint};
use htype_core::jet::Jet;
use htype_core::minimizer::{moment_check, sweep_p, MinimizeOpts, MinimizeResult};
use htype_core::quadrature::{
    biradial_sublaplacian, horizontal_energy, integrate, lift_biradial, make_rule, BiradialField,
};
use htype_core::report::CheckReport;
use htype_core::spectral::spectrum;
use htype_core::structure::{construct_structure, j_map, verify_structure, HTypeStructure};

#[derive(Parser)]
#[command(
    name = "htype",
    version,
    about = "H-type group toolkit: structure verification, sharp-constant and \
             Hardy checks, linearized spectrum, subcritical minimization"
)]
struct Cli {
    /// Write the JSON-lines output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the defining matrix conditions and the J-map isometry.
    VerifyStructure {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Pointwise closed-form identities at seeded random points.
    Identities {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Sharp constant: closed formula against the quadrature quotient.
    SharpConstant {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        nodes: usize,
        #[arg(long, default_value_t = 2.0)]
        scale: f64,
    },
    /// Energy and Hardy quotients of the extremal profile and perturbations.
    Quotient {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        nodes: usize,
        #[arg(long, default_value_t = 2.0)]
        scale: f64,
    },
    /// Two lowest eigenvalues of the linearized operator (Galerkin).
    Spectrum {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 15)]
        k: usize,
        #[arg(long, default_value_t = 64)]
        nodes: usize,
    },
    /// Minimize the subcritical quotient at a single exponent.
    Minimize {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        /// Default is finer than elsewhere: the p = 2 value check needs the
        /// grid bias below 1e-4.
        #[arg(long, default_value_t = 96)]
        nodes: usize,
        #[arg(long, default_value_t = 4.0)]
        scale: f64,
    },
    /// Warm-started sweep over ascending subcritical exponents.
    SweepP {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// Comma-separated ascending exponents.
        #[arg(long, default_value = "2,2.5,3,3.5,3.8", value_delimiter = ',')]
        p: Vec<f64>,
        #[arg(long, default_value_t = 96)]
        nodes: usize,
        #[arg(long, default_value_t = 4.0)]
        scale: f64,
        /// Also write a CSV table (p, lambda_p, deviation, lambda_coeff, moment).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// The full verification suite at reference settings.
    All {
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

/// Collects output lines and the overall verdict.
struct Emitter {
    lines: Vec<String>,
    all_pass: bool,
}

impl Emitter {
    fn new() -> Self {
        Emitter {
            lines: Vec::new(),
            all_pass: true,
        }
    }

    fn report(&mut self, r: CheckReport) {
        self.all_pass &= r.pass;
        self.lines
            .push(serde_json::to_string(&r).expect("report serialization"));
    }

    fn value<T: Serialize>(&mut self, v: &T) {
        self.lines
            .push(serde_json::to_string(v).expect("value serialization"));
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonConvergence(_)
        | Error::Conditioning { .. }
        | Error::NotPositiveDefinite { .. }
        | Error::Assembly { .. }
        | Error::NonFiniteNode { .. }
        | Error::GridDerivativeCheck { .. } => 3,
        _ => 2,
    }
}

fn main() {
    let cli = Cli::parse();
    let mut em = Emitter::new();
    let run = match &cli.cmd {
        Cmd::VerifyStructure {
            m,
            n,
            samples,
            seed,
        } => cmd_verify_structure(&mut em, *m, *n, *samples, *seed),
        Cmd::Identities {
            m,
            n,
            samples,
            seed,
        } => cmd_identities(&mut em, *m, *n, *samples, *seed),
        Cmd::SharpConstant { m, n, nodes, scale } => {
            cmd_sharp_constant(&mut em, *m, *n, *nodes, *scale, false)
        }
        Cmd::Quotient { m, n, nodes, scale } => cmd_quotient(&mut em, *m, *n, *nodes, *scale),
        Cmd::Spectrum { m, n, k, nodes } => cmd_spectrum(&mut em, *m, *n, *k, *nodes),
        Cmd::Minimize {
            m,
            n,
            p,
            nodes,
            scale,
        } => cmd_minimize(&mut em, *m, *n, *p, *nodes, *scale),
        Cmd::SweepP {
            m,
            n,
            p,
            nodes,
            scale,
            csv,
        } => cmd_sweep(&mut em, *m, *n, p, *nodes, *scale, csv.as_deref()),
        Cmd::All { seed } => cmd_all(&mut em, *seed),
    };

    let code = match run {
        Ok(()) => {
            if em.all_pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };

    let body = em.lines.join("\n") + "\n";
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, body) {
                eprintln!("error: cannot write {}: {e}", path.display());
                std::process::exit(2);
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(body.as_bytes()).is_err() {
                std::process::exit(2);
            }
        }
    }
    std::process::exit(code);
}

/// Seeded sample biased to hom-norm <= 5, where the identities are
/// numerically most sensitive.
fn sample_point(rng: &mut ChaCha8Rng, m: usize, n: usize) -> GroupPoint {
    loop {
        let p = GroupPoint::new(
            (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        );
        if hom_norm(&p) <= 5.0 {
            return p;
        }
    }
}

fn cmd_verify_structure(
    em: &mut Emitter,
    m: usize,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<(), Error> {
    let s = construct_structure(m, n)?;
    for r in verify_structure(&s, 0.0) {
        em.report(r);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w = j_map(&s, &z, &v);
        let w2: f64 = w.iter().map(|x| x * x).sum();
        let z2: f64 = z.iter().map(|x| x * x).sum();
        let v2: f64 = v.iter().map(|x| x * x).sum();
        let expect = z2 * v2;
        if expect > 0.0 {
            worst = worst.max((w2 - expect).abs() / expect);
        }
    }
    em.report(
        CheckReport::new("structure.j_isometry", worst, 0.0, 1e-12, 0.0)
            .with_param("m", m)
            .with_param("n", n)
            .with_param("samples", samples)
            .with_param("seed", seed),
    );
    Ok(())
}

fn cmd_identities(
    em: &mut Emitter,
    m: usize,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<(), Error> {
    let s = construct_structure(m, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..samples {
        let xi = sample_point(&mut rng, m, n);
        let lam = rng.gen_range(0.3..3.0);
        let eta = sample_point(&mut rng, m, n);
        let params = BubbleParams::new(lam, eta)?;
        let yr = yamabe_residual(&s, &params, &xi).abs();
        em.report(
            CheckReport::new("closedform.yamabe_residual", yr, 0.0, 1e-8, 0.0)
                .with_param("m", m)
                .with_param("n", n)
                .with_param("sample", k),
        );
        em.report(sum_of_squares_check(&s, &xi).with_param("sample", k));
        let sum: f64 = omega_all(&s, &xi).iter().map(|w| w * w).sum();
        em.report(
            CheckReport::new("closedform.omega_sum_of_squares", sum, 1.0, 1e-12, 0.0)
                .with_param("m", m)
                .with_param("n", n)
                .with_param("sample", k),
        );
        let mut er = 0.0f64;
        for i in 1..=m + n + 1 {
            er = er.max(htype_core::closedform::eigen_residual(&s, i, &xi)?.abs());
        }
        em.report(
            CheckReport::new("closedform.eigen_residual", er, 0.0, 1e-8, 0.0)
                .with_param("m", m)
                .with_param("n", n)
                .with_param("sample", k),
        );
    }
    Ok(())
}

fn cmd_sharp_constant(
    em: &mut Emitter,
    m: usize,
    n: usize,
    nodes: usize,
    scale: f64,
    strict: bool,
) -> Result<(), Error> {
    let s = construct_structure(m, n)?;
    let q = s.q();
    let formula = sharp_constant(m, n)?;
    let rule = make_rule(m, n, nodes, scale)?;
    let u = bubble_biradial(q);
    let r = fs_quotient(&rule, q, &u)?;
    em.report(
        CheckReport::new("functionals.sharp_constant", r.quotient, formula, 0.0, 1e-6)
            .with_param("m", m)
            .with_param("n", n)
            .with_param("nodes", nodes)
            .with_param("scale", scale),
    );
    if (m, n) == (2, 1) {
        // both defining integrals have the closed value pi^2 here
        let tol = if strict { 1e-7 } else { 1e-6 };
        em.report(
            CheckReport::new("functionals.energy_of_extremal", r.numerator, PI * PI, 0.0, tol)
                .with_param("nodes", nodes),
        );
        em.report(
            CheckReport::new(
                "functionals.critical_norm_of_extremal",
                r.denominator_integral,
                PI * PI,
                0.0,
                tol,
            )
            .with_param("nodes", nodes),
        );
        em.report(CheckReport::new(
            "functionals.sharp_constant_closed_form",
            formula,
            PI,
            0.0,
            1e-14,
        ));
    }
    Ok(())
}

fn cmd_quotient(em: &mut Emitter, m: usize, n: usize, nodes: usize, scale: f64) -> Result<(), Error> {
    let s = construct_structure(m, n)?;
    let q = s.q();
    let rule = make_rule(m, n, nodes, scale)?;
    let u = bubble_biradial(q);
    let formula = sharp_constant(m, n)?;
    let fsr = fs_quotient(&rule, q, &u)?;
    em.report(
        CheckReport::new("functionals.fs_quotient_extremal", fsr.quotient, formula, 0.0, 1e-6)
            .with_param("m", m)
            .with_param("n", n),
    );
    let bound = m as f64 * (q as f64 - 2.0) / 4.0;
    let hr = hardy_quotient(&rule, &u)?;
    em.report(
        CheckReport::new("functionals.hardy_equality", hr.quotient, bound, 0.0, 1e-6)
            .with_param("m", m)
            .with_param("n", n),
    );
    // strictness off the extremal line: three perturbations, each must
    // clear the bound by a definite margin
    let omega = omega_dilation_biradial();
    let perturbed: [(&str, Box<dyn BiradialField>); 3] = [
        (
            "dilation_mode_0.3",
            Box::new({
                let u = u.clone();
                let w = omega.clone();
                move |sj: Jet, tj: Jet| u.eval(sj, tj) * (w.eval(sj, tj) * 0.3 + 1.0)
            }),
        ),
        (
            "dilation_mode_0.5",
            Box::new({
                let u = u.clone();
                let w = omega.clone();
                move |sj: Jet, tj: Jet| u.eval(sj, tj) * (w.eval(sj, tj) * 0.5 + 1.0)
            }),
        ),
        (
            "gaussian_bump_0.2",
            Box::new({
                let u = u.clone();
                move |sj: Jet, tj: Jet| {
                    u.eval(sj, tj) * ((-(sj * sj) - tj * tj).exp() * 0.2 + 1.0)
                }
            }),
        ),
    ];
    for (name, f) in &perturbed {
        let r = hardy_quotient(&rule, f.as_ref())?;
        let mut rep = CheckReport::new("functionals.hardy_margin", r.quotient, bound, 0.0, 0.0);
        rep.pass = r.quotient - bound > 1e-3;
        rep.params.insert("perturbation".into(), name.to_string());
        rep.params.insert("margin_min".into(), "1e-3".into());
        em.report(rep);
    }
    Ok(())
}

fn cmd_spectrum(em: &mut Emitter, m: usize, n: usize, k: usize, nodes: usize) -> Result<(), Error> {
    let s = construct_structure(m, n)?;
    let q = s.q() as f64;
    let r = spectrum(&s, k, nodes)?;
    em.value(&r);
    let mu1 = m as f64 * (q - 2.0) / 4.0;
    let mu2 = m as f64 * (q + 2.0) / 4.0;
    let tol = if (m, n) == (2, 1) { 1e-3 } else { 1e-2 };
    em.report(
        CheckReport::new("spectral.mu1", r.eigenvalues[0], mu1, 0.0, tol)
            .with_param("m", m)
            .with_param("n", n)
            .with_param("k", k)
            .with_param("nodes", nodes),
    );
    em.report(
        CheckReport::new("spectral.mu2", r.eigenvalues[1], mu2, 0.0, tol)
            .with_param("m", m)
            .with_param("n", n)
            .with_param("k", k)
            .with_param("nodes", nodes),
    );
    // Rayleigh-Ritz upper bounds, up to quadrature error
    let mut ub = CheckReport::new("spectral.upper_bounds", r.eigenvalues[0].min(r.eigenvalues[1]), 0.0, f64::INFINITY, 0.0);
    ub.pass = r.eigenvalues[0] >= mu1 - 1e-4 && r.eigenvalues[1] >= mu2 - 1e-4;
    ub.params.insert("slack".into(), "1e-4".into());
    em.report(ub);
    // nested variational spaces: values decrease as the basis grows
    if k > 10 {
        let r10 = spectrum(&s, 10, nodes)?;
        let mut mono = CheckReport::new("spectral.monotone_in_basis", 0.0, 0.0, f64::INFINITY, 0.0);
        mono.pass = r.eigenvalues[0] <= r10.eigenvalues[0] + 1e-12
            && r.eigenvalues[1] <= r10.eigenvalues[1] + 1e-12;
        mono.params.insert("k_small".into(), "10".into());
        em.report(mono);
    }
    em.report(
        CheckReport::new("spectral.mass_condition", r.mass_condition, 0.0, 1e12, 0.0)
            .with_param("k", k),
    );
    Ok(())
}

/// Diagnostics of a minimization run, without the node-value payload.
#[derive(Serialize)]
struct MinimizeSummary {
    p: f64,
    lambda_p: f64,
    iterations: usize,
    lambda_coeff: f64,
    deviation: f64,
    moment_dilation: f64,
    constraint_residual: f64,
    ns: usize,
    nt: usize,
    energy_history: Vec<f64>,
}

impl MinimizeSummary {
    fn of(r: &MinimizeResult) -> Self {
        MinimizeSummary {
            p: r.p,
            lambda_p: r.lambda_p,
            iterations: r.iterations,
            lambda_coeff: r.lambda_coeff,
            deviation: r.deviation,
            moment_dilation: r.moment_dilation,
            constraint_residual: r.constraint_residual,
            ns: r.ns,
            nt: r.nt,
            energy_history: r.energy_history.clone(),
        }
    }
}

fn minimize_reports(em: &mut Emitter, s: &HTypeStructure, r: &MinimizeResult) {
    em.value(&MinimizeSummary::of(r));
    em.report(
        CheckReport::new(
            "minimizer.constraint_residual",
            r.constraint_residual,
            0.0,
            1e-8,
            0.0,
        )
        .with_param("p", r.p),
    );
    em.report(moment_check(r));
    if r.p == 2.0 {
        let q = s.q() as f64;
        let expected = s.m as f64 * (q - 2.0) / 4.0;
        em.report(
            CheckReport::new("minimizer.lambda_2", r.lambda_p, expected, 0.0, 1e-4)
                .with_param("m", s.m)
                .with_param("n", s.n),
        );
        em.report(
            CheckReport::new("minimizer.p2_deviation", r.deviation, 0.0, 1e-4, 0.0)
                .with_param("m", s.m)
                .with_param("n", s.n),
        );
    }
}

fn cmd_minimize(
    em: &mut Emitter,
    m: usize,
    n: usize,
    p: f64,
    nodes: usize,
    scale: f64,
) -> Result<(), Error> {
    let s = construct_structure(m, n)?;
    let rule = make_rule(m, n, nodes, scale)?;
    let r = htype_core::minimizer::minimize_subcritical(&s, p, &rule, &MinimizeOpts::default())?;
    minimize_reports(em, &s, &r);
    Ok(())
}

fn cmd_sweep(
    em: &mut Emitter,
    m: usize,
    n: usize,
    p_list: &[f64],
    nodes: usize,
    scale: f64,
    csv: Option<&std::path::Path>,
) -> Result<(), Error> {
    let s = construct_structure(m, n)?;
    let q = s.q() as f64;
    let rule = make_rule(m, n, nodes, scale)?;
    let runs = sweep_p(&s, p_list, &rule, &MinimizeOpts::default())?;
    for r in &runs {
        minimize_reports(em, &s, r);
    }
    // the continuum deviation is identically zero along the sweep (the
    // extremal profile solves every subcritical Euler-Lagrange equation),
    // so the trend is compared with an absolute floor at the level of the
    // grid bias besides the 10% slack
    let floor = 2e-5;
    for w in runs.windows(2) {
        let mut rep = CheckReport::new(
            "minimizer.deviation_trend",
            w[1].deviation,
            w[0].deviation,
            f64::INFINITY,
            0.0,
        );
        rep.pass = w[1].deviation <= 1.1 * w[0].deviation + floor;
        rep.params.insert("p_from".into(), w[0].p.to_string());
        rep.params.insert("p_to".into(), w[1].p.to_string());
        rep.params.insert("slack".into(), "10%".into());
        rep.params.insert("floor".into(), format!("{floor:e}"));
        em.report(rep);
    }
    // coefficient bound from the concentration argument, factor-2 slack
    let u = bubble_biradial(s.q());
    let crit = 2.0 * q / (q - 2.0);
    let mass = integrate(&rule, &|sj: Jet, tj: Jet| u.eval(sj, tj).powf(crit))?;
    let cap = 2.0 * mass.powf(-(q - 2.0) / (2.0 * q));
    for r in &runs {
        let mut rep = CheckReport::new("minimizer.coeff_bound", r.lambda_coeff, cap, f64::INFINITY, 0.0);
        rep.pass = r.lambda_coeff > 0.0 && r.lambda_coeff <= cap;
        rep.params.insert("p".into(), r.p.to_string());
        em.report(rep);
    }
    if let Some(last) = runs.last() {
        let energy_u = horizontal_energy(&rule, &u)?;
        em.report(
            CheckReport::new(
                "minimizer.final_deviation",
                last.deviation,
                0.0,
                1e-3 * energy_u,
                0.0,
            )
            .with_param("p", last.p),
        );
    }
    if let Some(path) = csv {
        let mut body = String::from("p,lambda_p,deviation,lambda_coeff,moment\n");
        for r in &runs {
            body.push_str(&format!(
                "{},{},{},{},{}\n",
                r.p, r.lambda_p, r.deviation, r.lambda_coeff, r.moment_dilation
            ));
        }
        std::fs::write(path, body).map_err(|e| Error::Domain(format!("cannot write CSV: {e}")))?;
    }
    Ok(())
}

/// Criterion 7: the biradial reductions against the jet calculus, and the
/// closed-form omegas against parameter differentiation of the bubble orbit.
fn cmd_oracles(em: &mut Emitter, m: usize, n: usize, samples: usize, seed: u64) -> Result<(), Error> {
    let s = construct_structure(m, n)?;
    let q = s.q();
    let u = bubble_biradial(q);
    let lifted = lift_biradial(&u);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_lap = 0.0f64;
    let mut worst_grad = 0.0f64;
    for _ in 0..samples {
        let sv: f64 = rng.gen_range(0.2..4.0);
        let tv: f64 = rng.gen_range(0.2..4.0);
        let mut x = vec![0.0; m];
        x[0] = sv;
        let mut t = vec![0.0; n];
        t[0] = tv;
        let p = GroupPoint::new(x, t);
        let full = sublaplacian(&s, &lifted, &p);
        let red = biradial_sublaplacian(m, n, &u, sv, tv);
        worst_lap = worst_lap.max((full - red).abs() / full.abs().max(1e-300));
        let g = horizontal_gradient(&s, &lifted, &p);
        let g2: f64 = g.iter().map(|v| v * v).sum();
        let j = u.eval(Jet::var1(sv), Jet::var2(tv));
        let red2 = j.d1 * j.d1 + sv * sv / 4.0 * j.d2 * j.d2;
        worst_grad = worst_grad.max((g2 - red2).abs() / g2.abs().max(1e-300));
    }
    em.report(
        CheckReport::new("oracle.sublaplacian_reduction", worst_lap, 0.0, 1e-8, 0.0)
            .with_param("m", m)
            .with_param("n", n)
            .with_param("samples", samples),
    );
    em.report(
        CheckReport::new("oracle.gradient_reduction", worst_grad, 0.0, 1e-8, 0.0)
            .with_param("m", m)
            .with_param("n", n)
            .with_param("samples", samples),
    );
    // omega closed forms against parameter jets of the bubble orbit
    let qf = q as f64;
    let mut worst_omega = 0.0f64;
    for _ in 0..samples {
        let xi = sample_point(&mut rng, m, n);
        let uval = bubble(&s, &xi);
        let d = parameter_derivatives(&s, &xi);
        let w = omega_all(&s, &xi);
        for j in 0..m + n {
            worst_omega = worst_omega.max((w[j] - 4.0 / (qf - 2.0) / uval * d[j]).abs());
        }
        worst_omega = worst_omega.max((w[m + n] - 2.0 / (qf - 2.0) / uval * d[m + n]).abs());
    }
    em.report(
        CheckReport::new("oracle.omega_parameter_jets", worst_omega, 0.0, 1e-10, 0.0)
            .with_param("m", m)
            .with_param("n", n)
            .with_param("samples", samples),
    );
    Ok(())
}

fn cmd_all(em: &mut Emitter, seed: u64) -> Result<(), Error> {
    for (m, n) in [(2, 1), (4, 1), (4, 3), (8, 7), (16, 8)] {
        cmd_verify_structure(em, m, n, 100, seed)?;
    }
    for (m, n) in [(2, 1), (4, 3)] {
        cmd_identities(em, m, n, 100, seed)?;
    }
    for (m, n) in [(2, 1), (4, 3), (8, 7)] {
        cmd_sharp_constant(em, m, n, 96, 4.0, true)?;
    }
    cmd_quotient(em, 2, 1, 64, 2.0)?;
    cmd_quotient(em, 4, 3, 64, 2.0)?;
    cmd_spectrum(em, 2, 1, 15, 64)?;
    cmd_spectrum(em, 4, 3, 15, 64)?;
    for (m, n) in [(2, 1), (4, 3)] {
        cmd_oracles(em, m, n, 100, seed)?;
    }
    cmd_sweep(em, 2, 1, &[2.0, 2.5, 3.0, 3.5, 3.8], 96, 4.0, None)?;
    Ok(())
}
