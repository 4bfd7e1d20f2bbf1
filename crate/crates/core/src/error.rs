use thiserror::Error;

/// Errors raised while deriving snapshots or evaluating admission.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("capacity violation: total occupancy {total} exceeds buffer of {buffer} packets")]
    CapacityViolation { total: u64, buffer: u64 },

    #[error("length vector has {got} entries but the layout has {expected} queues")]
    LengthMismatch { got: usize, expected: usize },

    #[error("no queue for port {port}, class {class}")]
    UnknownQueue { port: usize, class: u32 },

    #[error("class {0} is not configured")]
    UnknownClass(u32),

    #[error("congested-queue count is zero for a queue that must be counted")]
    NoCongestedQueue,

    #[error("normalized dequeue rate {0} outside [0, 1]")]
    GammaOutOfRange(String),
}

/// Scenario validation failures. Each variant names the offending field.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

impl ConfigError {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Scenario file could not be read or decoded.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("{field}: {message}")]
    Value { field: String, message: String },

    #[error("line {line}: {message}")]
    Line { line: usize, message: String },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Loading a scenario fails either while decoding (exit code 2) or while
/// validating the decoded values (exit code 3).
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FluidError {
    #[error("transient scenario has no new queues")]
    NoNewQueues,

    #[error("scenario is {actual:?}, formula requires {expected:?}")]
    WrongCase {
        expected: crate::fluid::Case,
        actual: crate::fluid::Case,
    },

    #[error("t1 denominator is not positive; crossing time undefined")]
    NonPositiveDenominator,

    #[error("invalid argument {name}: {message}")]
    InvalidArgument { name: &'static str, message: String },

    #[error("policy {0} has no fluid threshold model")]
    UnsupportedPolicy(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("axis {axis} does not apply to this scenario: {reason}")]
    IncompatibleAxis { axis: String, reason: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("baseline label {0:?} not found")]
    MissingBaseline(String),

    #[error("run {label:?} has a different queue set than the baseline")]
    AxisMismatch { label: String },

    #[error("at least two runs are required, got {0}")]
    TooFewRuns(usize),
}
