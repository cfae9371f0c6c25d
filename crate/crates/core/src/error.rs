use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // graph model
    #[error("edge {edge}: length {text:?} is not an exact rational")]
    IrrationalLength { edge: usize, text: String },
    #[error("edge {edge}: length must be positive")]
    NonPositiveLength { edge: usize },
    #[error("edge {edge}: bad breakpoints: {reason}")]
    BadBreakpoints { edge: usize, reason: String },
    #[error("edge {edge}: potential values must be finite")]
    NonFinitePotential { edge: usize },
    #[error("graph has no pendant edge (p = 0)")]
    NoPendantEdge,
    #[error("bad topology: {0}")]
    BadTopology(String),
    #[error("invalid unit {0:?}: expected \"pi\" or a positive number")]
    BadUnit(String),
    #[error("config: {0}")]
    Config(String),

    // characteristic functions
    #[error("pendant index {index} outside 1..={p}")]
    BadIndex { index: usize, p: usize },
    #[error("lambda = {lambda} is a pole of the Weyl function (|Δ| = {magnitude:e})")]
    NearPole { lambda: f64, magnitude: f64 },

    // spectrum
    #[error("characteristic function has no oscillating term")]
    ConstantFunction,
    #[error("multiplicity of the zero at {alpha} could not be resolved")]
    UnresolvedMultiplicity { alpha: f64 },
    #[error("scan resolution too coarse: {0}")]
    ScanResolutionTooCoarse(String),
    #[error("ambiguous eigenvalue assignment: {0}")]
    AssignmentAmbiguity(String),

    // reconstruction
    #[error("leading constant {value:e} is degenerate (scale {scale:e})")]
    DegenerateLeadingTerm { value: f64, scale: f64 },
    #[error("catalog does not cover |n| <= {n_max}: {reason}")]
    InsufficientCatalog { n_max: i64, reason: String },

    // oracle
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
