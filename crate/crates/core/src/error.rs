use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension for {what}: {value}")]
    InvalidDimension { what: &'static str, value: usize },

    #[error("{what} must be square, got {rows}x{cols}")]
    NotSquare { what: &'static str, rows: usize, cols: usize },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch { context: &'static str, expected: usize, found: usize },

    #[error("{what} has non-finite entries")]
    NonFinite { what: &'static str },

    #[error("ragged nested matrix rows")]
    Ragged,

    #[error("matrix is not unitary: ‖U†U − I‖_F = {residual:e}")]
    NotUnitary { residual: f64 },

    #[error("matrix is not Hermitian: ‖A − A†‖_F = {residual:e}")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("state is not normalised: squared norm {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("density operator trace is {trace}, expected 1")]
    BadTrace { trace: f64 },

    #[error("invalid probability vector: {reason}")]
    InvalidProbability { reason: String },

    #[error("effective rank {rank} exceeds the rank cap {cap}")]
    RankCapExceeded { rank: u128, cap: usize },

    #[error("POVM effects do not sum to the identity: ‖Σ E_i − I‖_F = {residual:e}")]
    IncompletePovm { residual: f64 },

    #[error("inconsistent POVM: outcome probabilities sum to {total}")]
    InconsistentPovm { total: f64 },

    #[error("overlap Tr(E_{row} ρ_{col}) has imaginary residue {residual:e}")]
    ComplexOverlap { row: usize, col: usize, residual: f64 },

    #[error("invalid overlap matrix: {reason}")]
    InvalidOverlap { reason: String },

    #[error(
        "outcome {outcome} has zero probability but non-zero sensitivity (row norm {row_norm:e}); \
         Fisher information diverges on the simplex boundary"
    )]
    SingularOutcome { outcome: usize, row_norm: f64 },

    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {}", format_problems(.0))]
    InvalidConfig(Vec<crate::harness::Problem>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_problems(problems: &[crate::harness::Problem]) -> String {
    problems.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
