use alloc::boxed::Box;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    DimensionMismatch { expected: usize, found: usize },
    NotSquare { rows: usize, cols: usize },
    NotPositiveSemiDefinite,
    Singular,
    /// A series needs at least two observations and one variable.
    TooShort { rows: usize, cols: usize },
    NonFinite { row: usize, col: usize },
    LagOutOfRange { lag: usize, max: usize },
    NotSymmetric { asymmetry: f64 },
    /// Jacobi sweeps hit the iteration cap.
    NoConvergence { sweeps: usize, off_diagonal: f64 },
    NonPositiveEigenvalue { index: usize, value: f64 },
    /// Adjacent eigenvalues closer than the guard threshold (`index` is the
    /// zero-based position of the upper eigenvalue of the pair).
    DegenerateEigenvalues { index: usize, gap: f64, threshold: f64 },
    BandwidthOutOfRange { bandwidth: usize, max: usize },
    NotOrthonormal { error: f64 },
    NonUniformGrid,
    GridMismatch { expected: usize, found: usize },
    NonStationary { spectral_radius: f64 },
    InvalidDgpId(u32),
    InvalidBlockSize { block_size: usize, n: usize },
    TooFewReplicates { replicates: usize, min: usize },
    /// More than 1% of replicates failed; carries the first failure.
    ReplicateFailures { failed: usize, total: usize, first: Box<Error> },
    MissingScale,
    InvalidAlpha(f64),
    InvalidParameter(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NotSquare { rows, cols } => write!(f, "matrix is {rows}x{cols}, expected square"),
            Error::NotPositiveSemiDefinite => write!(f, "matrix is not positive semi-definite"),
            Error::Singular => write!(f, "matrix is singular"),
            Error::TooShort { rows, cols } => write!(
                f,
                "series has {rows} observations of {cols} variables; need n >= 2 and p >= 1"
            ),
            Error::NonFinite { row, col } => {
                write!(f, "non-finite value at observation {row}, variable {col}")
            }
            Error::LagOutOfRange { lag, max } => write!(f, "lag {lag} out of range 0..={max}"),
            Error::NotSymmetric { asymmetry } => {
                write!(f, "matrix is not symmetric (max |m_ij - m_ji| = {asymmetry:e})")
            }
            Error::NoConvergence { sweeps, off_diagonal } => write!(
                f,
                "Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_diagonal:e})"
            ),
            Error::NonPositiveEigenvalue { index, value } => {
                write!(f, "eigenvalue {} is not positive ({value:e})", index + 1)
            }
            Error::DegenerateEigenvalues { index, gap, threshold } => write!(
                f,
                "eigenvalues {} and {} are nearly tied (gap {gap:e} < {threshold:e})",
                index + 1,
                index + 2
            ),
            Error::BandwidthOutOfRange { bandwidth, max } => {
                write!(f, "bandwidth {bandwidth} out of range 1..={max}")
            }
            Error::NotOrthonormal { error } => {
                write!(f, "basis is not orthonormal (max |BᵀB - I| = {error:e})")
            }
            Error::NonUniformGrid => write!(f, "frequency grid is not uniform over [-pi, pi]"),
            Error::GridMismatch { expected, found } => {
                write!(f, "grid has {found} points, expected {expected}")
            }
            Error::NonStationary { spectral_radius } => write!(
                f,
                "model is not stationary (companion spectral radius {spectral_radius:.6} >= 1)"
            ),
            Error::InvalidDgpId(id) => write!(f, "unknown DGP id {id}; expected 1..=8"),
            Error::InvalidBlockSize { block_size, n } => {
                write!(f, "block size {block_size} out of range 1..={n}")
            }
            Error::TooFewReplicates { replicates, min } => {
                write!(f, "{replicates} replicates requested, need at least {min}")
            }
            Error::ReplicateFailures { failed, total, first } => write!(
                f,
                "{failed} of {total} replicates failed (first failure: {first})"
            ),
            Error::MissingScale => write!(f, "asymptotic covariance has no sample size attached"),
            Error::InvalidAlpha(a) => write!(f, "significance level {a} outside (0, 0.5]"),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
        }
    }
}

impl core::error::Error for Error {}
