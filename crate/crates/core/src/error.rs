use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model parameter: {0}")]
    InvalidModel(String),

    #[error("dielectric function is singular at omega = {re} {im:+}i")]
    Singularity { re: f64, im: f64 },

    #[error("coupling integral diverges: {0}")]
    Divergence(String),

    #[error("argument outside the supported domain: {0}")]
    Domain(String),

    #[error("root finder did not converge after {iterations} iterations (max residual {max_residual:.3e})")]
    RootFinding {
        iterations: usize,
        max_residual: f64,
    },

    #[error("degenerate dispersion root near omega = {re} {im:+}i (|d(omega^2 eps)/d omega| = {derivative:.3e})")]
    DegenerateRoot { re: f64, im: f64, derivative: f64 },

    #[error("incomplete branch set at k = {k}: weighted root count {found} but the dispersion relation has {expected} roots")]
    IncompleteBranchSet {
        k: f64,
        found: usize,
        expected: usize,
    },

    #[error(
        "quadrature failed to converge: achieved error {achieved:.3e}, requested {requested:.3e}"
    )]
    Quadrature { achieved: f64, requested: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}
