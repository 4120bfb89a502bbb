use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("edge {index} has length {length:e}, not above the geometric tolerance")]
    DegenerateEdge { index: usize, length: f64 },
    #[error("consecutive edges at vertex {index} are parallel or antiparallel")]
    DegenerateVertex { index: usize },
    #[error("degenerate isogram: delta = {delta}, lambda = {lambda} (delta = lambda or delta + lambda = pi)")]
    DegenerateIsogram { delta: f64, lambda: f64 },
    #[error("angle {name} = {value} outside the open interval (0, pi)")]
    AngleOutOfRange { name: &'static str, value: f64 },
    #[error("transmission ratio must be nonzero")]
    ZeroTransmission,
    #[error(
        "no admissible delta in (0, pi) for f = {f}, lambda = {lambda} on the {branch} branch"
    )]
    NoAdmissibleSolution {
        f: f64,
        lambda: f64,
        branch: &'static str,
    },
    #[error("spherical four-bar does not close (cosine argument {argument})")]
    NoRealClosure { argument: f64 },
    #[error("offset angle pi is not representable by a finite half-tangent")]
    PoleNotRepresentable,
    #[error("antipode normalisation failed: {0}")]
    NormalizationFailed(String),
    #[error(
        "Newton solver did not converge from {starts} starts (best residual {best_residual:e})"
    )]
    NoConvergence { starts: usize, best_residual: f64 },
    #[error("denominator `{0}` vanishes")]
    DegenerateDenominator(&'static str),
    #[error("belt is not flexible: closure residual {residual:e}")]
    NotFlexible { residual: f64 },
    #[error("solution is not real (largest imaginary part {max_imag:e})")]
    NonRealSolution { max_imag: f64 },
    #[error("spherical chain does not close: loop residual {closure:e}, worst arc residual {arc:e} at vertex {vertex}")]
    ClosureViolation {
        closure: f64,
        arc: f64,
        vertex: usize,
    },
    #[error("corner template at vertex {vertex} is inconsistent: {reason}")]
    InconsistentTemplate { vertex: usize, reason: String },
    #[error("length {0} must be positive and finite")]
    InvalidLength(f64),
    #[error(
        "driving angle {sample} leaves the real motion range; admissible intervals {intervals:?}"
    )]
    RangeExceeded {
        sample: f64,
        intervals: Vec<(f64, f64)>,
    },
    #[error("parallelism system has only translational solutions (dimension {dimension})")]
    NoNontrivialSolution { dimension: usize },
    #[error("parallelism system solution space has dimension {dimension} (> 4)")]
    AmbiguousSolution { dimension: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid problem: {0}")]
    Problem(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
