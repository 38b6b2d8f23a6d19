use std::path::PathBuf;

/// Errors produced anywhere in the reconstruction pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("phantom generation infeasible after {attempts} attempts: {reason}")]
    InfeasiblePhantom { attempts: usize, reason: String },

    #[error("template parse error at line {line}: {msg}")]
    Template { line: usize, msg: String },

    #[error("non-positive smoothed conductivity {value} at ({x}, {y})")]
    NonPositiveConductivity { value: f64, x: f64, y: f64 },

    #[error("singular finite element system (pivot {pivot}, value {value:e})")]
    SingularSystem { pivot: usize, value: f64 },

    #[error("numerically singular NtD matrix (condition estimate {condition:e})")]
    SingularNtd { condition: f64 },

    #[error("Faddeev kernel evaluated at the singular point (|w| = {0:e})")]
    SingularKernel(f64),

    #[error("ill-conditioned boundary integral equation at |k| = {k_abs}: relative residual {residual:e}")]
    IllConditionedBie { k_abs: f64, residual: f64 },

    #[error("empty k-point set: {0}")]
    EmptyKPoints(String),

    #[error("interpolation stencil outside the available lattice at k = {re} + {im}i")]
    StencilOutside { re: f64, im: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("Richardson iteration produced non-finite values at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error("dense oracle is limited to l <= 6, got l = {0}")]
    ResourceGuard(u32),

    #[error("singular dense system in the D-bar oracle")]
    SingularDbar,

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("checksum mismatch in {}", file.display())]
    Checksum { file: PathBuf },

    #[error("format version mismatch in {}: found {found}, expected {expected}", file.display())]
    Version {
        file: PathBuf,
        found: u32,
        expected: u32,
    },

    #[error("truncated file {}", file.display())]
    Truncated { file: PathBuf },

    #[error("malformed file {}: {msg}", file.display())]
    Format { file: PathBuf, msg: String },

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Wraps an error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
