use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operator is not Hermitian: max asymmetry {asymmetry:.3e}")]
    NotHermitian { asymmetry: f64 },

    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("eigensolver did not converge for a {dim}x{dim} matrix")]
    EigenNonConvergence { dim: usize },

    #[error("nested-commutator series not converged after order {max_order} (last term norm {last_term_norm:.3e})")]
    SeriesNonConvergence { max_order: usize, last_term_norm: f64 },

    #[error("series result has anti-Hermitian residual {residual:.3e} above {limit:.3e}")]
    AntiHermitianResidual { residual: f64, limit: f64 },

    #[error("finite-difference derivative failed its step-halving check (disagreement {disagreement:.3e})")]
    FiniteDifferenceUnstable { disagreement: f64 },

    #[error("unidentifiable parameter combination: information matrix is singular along {null_direction:?} (min eigenvalue {min_eigenvalue:.3e})")]
    SingularInformation {
        min_eigenvalue: f64,
        null_direction: Vec<f64>,
    },

    #[error("closed form requires isotropic sigma (sigma_x == sigma_y) and uniform photon numbers; use qfim_grid")]
    ClosedFormUnavailable,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
