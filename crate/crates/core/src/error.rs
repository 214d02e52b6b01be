use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("singular interpolation system: {0}")]
    SingularSystem(String),

    #[error("evaluation point {t} outside interpolation range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    ShapeMismatch {
        context: String,
        expected: String,
        got: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("solver diverged (non-finite field) at t = {t}, step {step}{case}")]
    Diverged { t: f64, step: usize, case: String },

    #[error("pressure solve did not reach tol {tol:.3e} within {max_iter} sweeps (residual {residual:.3e})")]
    PoissonNoConvergence {
        tol: f64,
        max_iter: usize,
        residual: f64,
    },

    #[error("negative radicand {0} in stress invariant")]
    NegativeRadicand(f64),

    #[error("scaler used before fitting")]
    ScalerUnfitted,

    #[error("relative L2 reference has zero norm")]
    ZeroNormReference,

    #[error("degenerate abscissa: all x values equal")]
    DegenerateAbscissa,

    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("checksum mismatch for array '{name}': stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch {
        name: String,
        stored: u32,
        computed: u32,
    },

    #[error("array '{name}' truncated: expected {expected} bytes, file has {got}")]
    TruncatedArray {
        name: String,
        expected: u64,
        got: u64,
    },

    #[error("unsupported format version {got} (supported: {supported})")]
    FormatVersion { got: u32, supported: u32 },

    #[error("missing manifest at {0}")]
    MissingManifest(String),

    #[error("checkpoint convention mismatch: {0}")]
    ConventionMismatch(String),

    #[error("malformed CSV at {path} line {line}: {reason}")]
    MalformedCsv {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("manifest parse error: {0}")]
    ManifestParse(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn shape(context: &str, expected: impl Into<String>, got: impl Into<String>) -> Self {
        Error::ShapeMismatch {
            context: context.to_string(),
            expected: expected.into(),
            got: got.into(),
        }
    }
}
