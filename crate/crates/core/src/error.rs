use thiserror::Error;

/// Errors raised by the analytic and simulation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid source: {0}")]
    InvalidSource(String),

    #[error("type puts mass {mass} on (x={x}, y={y}) where the model has none")]
    AbsoluteContinuityViolation { x: usize, y: usize, mass: f64 },

    #[error("type touches a zero of the model at (x={x}, y={y}); energy is infinite")]
    InfiniteEnergy { x: usize, y: usize },

    #[error("column y={y} has zero probability; the tilted conditional is undefined there")]
    DegenerateRow { y: usize },

    #[error("{what} = {value} is outside the admissible range [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("degenerate spectrum: all admissible sequences share one energy")]
    DegenerateSpectrum,

    #[error("beta = {0} > 1: the two-sided dominance rule only covers beta <= 1")]
    BetaOutOfRange(f64),

    #[error("enumeration of {sequences} sequences exceeds the budget of {budget}")]
    MemoryBudgetExceeded { sequences: f64, budget: u64 },

    #[error("no microstate survived the dilution")]
    EmptyDilution,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

impl Error {
    /// Short stable name of the variant, surfaced by the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidSource(_) => "InvalidSource",
            Error::AbsoluteContinuityViolation { .. } => "AbsoluteContinuityViolation",
            Error::InfiniteEnergy { .. } => "InfiniteEnergy",
            Error::DegenerateRow { .. } => "DegenerateRow",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::DegenerateSpectrum => "DegenerateSpectrum",
            Error::BetaOutOfRange(_) => "BetaOutOfRange",
            Error::MemoryBudgetExceeded { .. } => "MemoryBudgetExceeded",
            Error::EmptyDilution => "EmptyDilution",
            Error::Config(_) => "Config",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
