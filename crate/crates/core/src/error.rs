use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry encountered in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("eigensolver did not converge after {iters} iterations (worst residual {residual:.3e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rank {rank} exceeds dimension {dim}")]
    RankTooLarge { rank: usize, dim: usize },

    #[error("requested {m} Pauli strings but only {available} exist for {n} qubits")]
    TooManyMeasurements { m: usize, n: u32, available: u128 },

    #[error("{n} qubits exceeds the dense cap of {cap}")]
    AboveDenseCap { n: u32, cap: u32 },

    #[error("spectrum is rank-deficient for rank {rank} (sigma_r = {sigma_r:.3e})")]
    RankDeficient { rank: usize, sigma_r: f64 },

    #[error("degenerate step size: both spectral terms vanish")]
    DegenerateStep,

    #[error("iteration diverged at step {iter}: objective {objective:.3e}")]
    Diverged { iter: usize, objective: f64 },

    #[error("trace has no distance column")]
    MissingDistance,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
