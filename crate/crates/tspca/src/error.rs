use std::path::PathBuf;

use tspca_core::Error as CoreError;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_PRECONDITION: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable or non-conforming input data.
    #[error("{0}")]
    Malformed(String),
    /// Inconsistent options or configuration file.
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{failed} of {total} experiments failed")]
    Aggregate { failed: usize, total: usize, first: Box<CliError> },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Malformed(_) | CliError::Usage(_) => EXIT_MALFORMED,
            CliError::Io { .. } => EXIT_FAILURE,
            CliError::Core(e) => core_exit_code(e),
            CliError::Aggregate { first, .. } => first.exit_code(),
        }
    }

    /// Short snake_case tag for the stderr line.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Malformed(_) => "malformed_input",
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Core(e) => core_kind(e),
            CliError::Aggregate { .. } => "experiments_failed",
        }
    }

    /// One line: `tspca-error kind=<kind> exit=<code> <message>`.
    pub fn report_line(&self) -> String {
        let mut message = self.to_string();
        if let CliError::Aggregate { first, .. } = self {
            message = format!("{message}; first: {first}");
        }
        let message = message.replace(['\n', '\r'], " ");
        format!("tspca-error kind={} exit={} {}", self.kind(), self.exit_code(), message)
    }
}

fn core_exit_code(e: &CoreError) -> i32 {
    use CoreError::*;
    match e {
        DegenerateEigenvalues { .. } | NonPositiveEigenvalue { .. } => EXIT_DEGENERATE,
        TooShort { .. } | NonFinite { .. } | DimensionMismatch { .. } | InvalidDgpId(_) => EXIT_MALFORMED,
        BandwidthOutOfRange { .. }
        | InvalidBlockSize { .. }
        | TooFewReplicates { .. }
        | ReplicateFailures { .. }
        | InvalidAlpha(_)
        | InvalidParameter(_)
        | LagOutOfRange { .. }
        | NonStationary { .. } => EXIT_PRECONDITION,
        _ => EXIT_FAILURE,
    }
}

fn core_kind(e: &CoreError) -> &'static str {
    use CoreError::*;
    match e {
        DimensionMismatch { .. } => "dimension_mismatch",
        NotSquare { .. } => "not_square",
        NotPositiveSemiDefinite => "not_psd",
        Singular => "singular",
        TooShort { .. } => "too_short",
        NonFinite { .. } => "non_finite",
        LagOutOfRange { .. } => "lag_out_of_range",
        NotSymmetric { .. } => "not_symmetric",
        NoConvergence { .. } => "no_convergence",
        NonPositiveEigenvalue { .. } => "nonpositive_eigenvalue",
        DegenerateEigenvalues { .. } => "degenerate_eigenvalues",
        BandwidthOutOfRange { .. } => "bandwidth_out_of_range",
        NotOrthonormal { .. } => "not_orthonormal",
        NonUniformGrid => "non_uniform_grid",
        GridMismatch { .. } => "grid_mismatch",
        NonStationary { .. } => "non_stationary",
        InvalidDgpId(_) => "invalid_dgp_id",
        InvalidBlockSize { .. } => "invalid_block_size",
        TooFewReplicates { .. } => "too_few_replicates",
        ReplicateFailures { .. } => "replicate_failures",
        MissingScale => "missing_scale",
        InvalidAlpha(_) => "invalid_alpha",
        InvalidParameter(_) => "invalid_parameter",
    }
}

pub type CliResult<T> = Result<T, CliError>;
