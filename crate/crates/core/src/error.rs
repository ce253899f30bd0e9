use alloc::string::String;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("evaluation of `{label}` failed at log t = {x}: {reason}")]
    EvaluationDomain { label: String, x: f64, reason: &'static str },

    #[error("`{label}` did not stabilize along fiber `{fiber}` within {n_max} terms (last spread {spread:e})")]
    FiberDivergence { label: String, fiber: String, n_max: u64, spread: f64 },

    #[error("`{label}` stabilizes to {computed} along fiber `{fiber}` but {declared} was declared")]
    DeclaredFiberMismatch { label: String, fiber: String, computed: String, declared: String },

    #[error("shift configuration: {0}")]
    ShiftConfig(String),

    #[error("log t = {0} lies outside the bracketable range of the shift")]
    Range(f64),

    #[error("orbit escaped the guard range after {steps} steps (log t = {x})")]
    OrbitEscape { steps: i64, x: f64 },

    #[error("indeterminate dynamics: {0}")]
    IndeterminateDynamics(String),

    #[error("limit of |a|-|b| at {endpoint} did not stabilize (window extrema spread {spread:e})")]
    IndeterminateLimit { endpoint: &'static str, spread: f64 },

    #[error("gamma not admissible: 1/p + Re gamma = {0} is not in (0, 1)")]
    Admissibility(f64),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("Neumann series refused: estimated sup|b/a| = {0}")]
    SeriesDivergence(f64),

    #[error("no {side} certificate: residual {residual:e} above tolerance {tol:e}")]
    NoCertificate { side: &'static str, residual: f64, tol: f64 },

    #[error("syntax error at column {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at column {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    #[error("missing symbol data: {0}")]
    Context(String),

    #[error("invalid instance: {0}")]
    Instance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;
