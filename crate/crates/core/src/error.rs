use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("shape is closer than {margin} to the grid box boundary")]
    ShapeTouchesBox { margin: f64 },

    #[error("level set has no interface (empty or full domain)")]
    EmptyOrFull,

    #[error("no zero crossing found in level set")]
    NoInterface,

    #[error("singular level-set gradient (|grad phi| = {norm:.3e}) at node ({i}, {j})")]
    SingularGradient { i: usize, j: usize, norm: f64 },

    #[error("degenerate point set: {0}")]
    Degenerate(String),

    #[error("invalid source: {0}")]
    InvalidSource(String),

    #[error("invalid boundary datum g: {0}")]
    InvalidG(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("eigenvalue iteration stagnated after {iterations} iterations (last Rayleigh quotient {rayleigh})")]
    EigenStagnation { iterations: usize, rayleigh: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
