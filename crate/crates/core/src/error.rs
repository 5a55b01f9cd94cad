use num_complex::Complex64;
use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, GyreError>;

#[derive(Debug, thiserror::Error)]
pub enum GyreError {
    #[error("tau must lie in the upper half-plane, got {0}")]
    InvalidTau(Complex64),
    #[error("theta series does not converge: |q| = {0} exceeds 0.985")]
    SeriesNonconvergence(f64),
    #[error("modulus {0} lies on the branch cut [1, inf)")]
    BranchCut(Complex64),
    #[error("point {0} (lattice-reduced) is within the pole guard radius")]
    PoleProximity(Complex64),
    #[error("root continuation is ambiguous near z = {0}")]
    ContinuationAmbiguity(Complex64),
    #[error("path passes within the guard radius of a branch point at z = {0}")]
    SingularInterior(Complex64),
    #[error("quadrature did not converge (last change {0:e})")]
    QuadratureNonconvergence(f64),
    #[error("dual integrals disagree: |int G - int 1/G| / |psi| = {0:e}")]
    DualMismatch(f64),
    #[error("pitch must be at least 1")]
    PitchZero,
    #[error("no sign change of the residual on Re tau = {re}; scanned {} points", table.len())]
    NoBracket { re: f64, table: Vec<(f64, f64)> },
    #[error("continuation broke after the point {last_re} + {last_im}i")]
    ContinuationBreak { last_re: f64, last_im: f64 },
    #[error("extrapolation diverged: {0}")]
    ExtrapolationDivergence(String),
    #[error("tau = {tau} is not a solved point (residual {residual:e})")]
    NotSolved { tau: Complex64, residual: f64 },
    #[error("seam mismatch {0:e} exceeds tolerance")]
    SeamMismatch(f64),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl GyreError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GyreError::Io {
            path: path.into(),
            source,
        }
    }
}
