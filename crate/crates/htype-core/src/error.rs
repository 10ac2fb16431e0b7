use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("(m, n) = ({m}, {n}) is not admissible: Radon-Hurwitz bound requires n <= rho(m) - 1 = {max_n}")]
    Inadmissible { m: usize, n: usize, max_n: usize },

    #[error("n = 0 gives a degenerate (abelian) structure with no center")]
    DegenerateStructure,

    #[error("center dimension n = {n} exceeds the supported construction limit of 8")]
    UnsupportedCenter { n: usize },

    #[error("dimension mismatch: expected ({m}, {n}), got ({got_m}, {got_n})")]
    Shape {
        m: usize,
        n: usize,
        got_m: usize,
        got_n: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite integrand value at node (s = {s}, tau = {tau})")]
    NonFiniteNode { s: f64, tau: f64 },

    #[error("basis conditioning failure: mass matrix condition number {cond:.3e} exceeds 1e12")]
    Conditioning { cond: f64 },

    #[error("matrix assembly produced a non-finite entry at ({row}, {col})")]
    Assembly { row: usize, col: usize },

    #[error("Cholesky factorization failed: matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { pivot: f64, index: usize },

    #[error("minimization did not converge: {0}")]
    NonConvergence(String),

    #[error("grid derivative check failed: relative error {rel_err:.3e} against analytic bubble derivatives")]
    GridDerivativeCheck { rel_err: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
