use thiserror::Error;

/// Crate-wide error type.
///
/// [`Error::exit_code`] maps errors onto the process exit codes used by the
/// `simulate` binary: 2 usage, 3 validation, 4 numerical, 1 i/o.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degree l = {l} exceeds the hard cap {cap}")]
    DegreeTooLarge { l: u32, cap: u32 },
    #[error("|z| = {modulus:.3e} exceeds the evaluation guard {guard:.0}")]
    ArgumentTooLarge { modulus: f64, guard: f64 },
    #[error("result overflows f64 (log magnitude ~ {log_magnitude:.1})")]
    Overflow { log_magnitude: f64 },
    #[error("order m = {m} out of range for degree l = {l}")]
    OrderOutOfRange { l: u32, m: i32 },
    #[error("degenerate packet: |R0.R0| below {threshold:.1e}, per-l decomposition undefined")]
    DegenerateSpec { threshold: f64 },
    #[error("operation requires an axial packet (r0 along the z axis, p0 = 0)")]
    NonAxialSpec,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("quadrature did not converge: {0}")]
    QuadratureNoConverge(String),
    #[error("degenerate field: every sample is below the detection floor")]
    DegenerateField,
    #[error("config parse error at line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },
    #[error("invalid value for `{key}`: {msg}")]
    ConfigValue { key: String, msg: String },
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit code contract of the `simulate` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::ConfigParse { .. }
            | Error::ConfigValue { .. }
            | Error::InvalidGrid(_)
            | Error::OrderOutOfRange { .. }
            | Error::NonAxialSpec => 3,
            Error::DegreeTooLarge { .. }
            | Error::ArgumentTooLarge { .. }
            | Error::Overflow { .. }
            | Error::DegenerateSpec { .. }
            | Error::DegenerateInput(_)
            | Error::QuadratureNoConverge(_)
            | Error::DegenerateField => 4,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
