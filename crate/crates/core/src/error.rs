use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("edge probability e[{i}][{j}] = {value} exceeds 1")]
    EdgeProbabilityOverflow { i: usize, j: usize, value: f64 },

    #[error("vertex index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("Pareto shape {shape} <= 1 gives an infinite mean")]
    InfiniteMean { shape: f64 },

    #[error("quadrature did not reach tolerance (estimated error {achieved:e})")]
    QuadratureFailure { achieved: f64 },

    #[error("residual-lifetime inversion failed: {0}")]
    InversionFailure(String),

    #[error("edge ({i}, {j}) has degenerate on-probability {e}")]
    DegenerateEdge { i: usize, j: usize, e: f64 },

    #[error("operation requires {0}")]
    WrongFamily(&'static str),

    #[error("negative covariance {value:e}")]
    NegativeCovariance { value: f64 },

    #[error("series has {k} snapshots, at least 3 are required")]
    SeriesTooShort { k: usize },

    #[error("parameter left the admissible region: {0}")]
    OutOfBounds(String),

    #[error("Jacobian is singular (condition number {cond:e})")]
    SingularJacobian { cond: f64 },

    #[error("need at least 2 runs, got {0}")]
    TooFewRuns(usize),

    #[error("samples of size {n1} and {n2} are too small (need >= 5 each)")]
    SampleTooSmall { n1: usize, n2: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
