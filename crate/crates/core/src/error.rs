//! Error type shared by every module.

/// Errors produced by dense kernels, operator builders, and file I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    DimensionMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("matrix is singular to working tolerance: pivot {pivot_index} fell below the relative threshold")]
    Singular { pivot_index: usize },

    #[error("matrix is defective to tolerance: {reason}")]
    Defective { reason: String },

    #[error("eigensolver did not converge within {iterations} QR iterations")]
    EigNoConvergence { iterations: usize },

    #[error("zero diagonal entry at index {index}; Jacobi smoother is undefined")]
    ZeroDiagonal { index: usize },

    #[error("invalid coarse/fine split: {reason}")]
    InvalidSplit { reason: String },

    #[error("transfer basis completion failed: {reason}")]
    BasisCompletion { reason: String },

    #[error("index out of range: {what} = {got} exceeds {limit}")]
    IndexOutOfRange {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("series length mismatch: expected {expected} entries, got {got}")]
    SeriesLength { expected: usize, got: usize },

    #[error("restriction is not relaxation-orthogonal to the fine basis: |R Ahat Q| = {norm:.3e} exceeds {tol:.1e}")]
    RestrictionNotOrthogonal { norm: f64, tol: f64 },

    #[error("memory horizon is degenerate: an eigenvalue of the compatible-relaxation propagator raised to k lies within {tol:.1e} of 1; increase k or change the split")]
    MemoryHorizonSingular { tol: f64 },

    #[error("eigenvalue magnitudes tie across the coarse cut: |lambda[{cut}]| = {above:.6e} vs |lambda[{cut_next}]| = {below:.6e}")]
    SpectralTie {
        cut: usize,
        cut_next: usize,
        above: f64,
        below: f64,
    },

    #[error("path enumeration budget exceeded: n = {n} (max {max_n}), depth = {k} (max {max_k})")]
    EnumerationBudget {
        n: usize,
        max_n: usize,
        k: usize,
        max_k: usize,
    },

    #[error("flow diverged: residual grew from {initial:.3e} to {last:.3e} within {steps} steps")]
    FlowDiverged {
        initial: f64,
        last: f64,
        steps: usize,
        history: Vec<f64>,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("invalid problem specification: {reason}")]
    InvalidProblem { reason: String },

    #[error("non-finite entries produced by {op}")]
    NonFinite { op: &'static str },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
