use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised while building, solving or checking a star-graph damping problem.
///
/// Edge indices carried by the variants are zero-based (edge 0 is the incoming edge).
#[derive(Debug, Error)]
pub enum Error {
    #[error("compression q = {0} must be strictly greater than one")]
    CompressionNotGreaterThanOne(f64),

    #[error("a star graph needs at least two edges, got {0}")]
    TooFewEdges(usize),

    #[error("edge {edge}: weight alpha = {alpha} must be positive")]
    NonPositiveWeight { edge: usize, alpha: f64 },

    #[error("edge {edge}: horizon T = {horizon} must be positive")]
    NonPositiveHorizon { edge: usize, horizon: f64 },

    #[error("edge {edge}: horizon T = {horizon} must exceed (q-1)*T1 = {minimum}")]
    HorizonTooShort { edge: usize, horizon: f64, minimum: f64 },

    #[error("parameter `{0}` is not a finite number")]
    NonFiniteParameter(String),

    #[error("edge {edge}: time {t} lies outside [0, {horizon}]")]
    TimeOutOfRange { edge: usize, t: f64, horizon: f64 },

    #[error("edge {edge}: mesh has no node at the mandatory breakpoint t = {t}")]
    MissingMandatoryNode { edge: usize, t: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("functions live on different meshes")]
    MeshMismatch,

    #[error("step h = {0} must be positive and finite")]
    InvalidStep(f64),

    #[error("step h = {h} exceeds the shortest edge length {max}")]
    StepTooLarge { h: f64, max: f64 },

    #[error("invalid control: {0}")]
    InvalidControl(String),

    #[error("edge {edge}: trapezoidal step ending at t = {t} is singular; reduce h")]
    SingularStep { edge: usize, t: f64 },

    #[error("edge {edge}: t = {t} is a mesh node where the derivative jumps; select a side")]
    EvaluationAtKinkWithoutSideSelector { edge: usize, t: f64 },

    #[error("energy form is not positive definite ({0})")]
    NotPositiveDefinite(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
