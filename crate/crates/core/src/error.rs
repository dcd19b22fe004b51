use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("spin must be positive (twice_s = {0})")]
    InvalidSpin(u32),
    #[error("anisotropy must satisfy delta >= 1 (got {0})")]
    InvalidAnisotropy(f64),
    #[error("operation requires delta > 1 (got {0})")]
    RequiresAnisotropic(f64),
    #[error("magnetization 2M = {twice_m} not allowed for {n_sites} sites of spin {twice_s}/2")]
    InvalidSector {
        n_sites: usize,
        twice_s: u32,
        twice_m: i64,
    },
    #[error("Hilbert space dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: u128, cap: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("site lists or spins of the two states differ")]
    SiteMismatch,
    #[error("operator couples sector entries ({row}, {col})")]
    NotBlockDiagonal { row: usize, col: usize },
    #[error("operator is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("dense solver limited to dimension {cap} (got {dim})")]
    DenseCap { dim: usize, cap: usize },
    #[error(
        "kernel ambiguous: {below} eigenvalues below {tol:e}, next eigenvalue {next:e} within 10x"
    )]
    AmbiguousKernel { below: usize, tol: f64, next: f64 },
    #[error("profile end values not saturated (alpha = {alpha}, beta = {beta})")]
    Undetermined { alpha: f64, beta: f64 },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(&'static str),
    #[error("invalid height window [{min}, {max}]: {reason}")]
    InvalidWindow {
        min: i64,
        max: i64,
        reason: &'static str,
    },
    #[error("Gram matrix is singular (smallest eigenvalue {0:e})")]
    SingularGram(f64),
}
