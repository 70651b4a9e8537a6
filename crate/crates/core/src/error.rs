use thiserror::Error;

pub type Result<T> = std::result::Result<T, MsaError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MsaError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not a proper rotation (orthonormality error {error:.3e})")]
    NotARotation { error: f64 },

    #[error("joint basis is not orthonormal: {0}")]
    NotOrthonormal(String),

    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("stiffness matrix asymmetry {asymmetry:.3e} exceeds tolerance {tolerance:.1e}")]
    Asymmetric { asymmetry: f64, tolerance: f64 },

    #[error("node index {0} does not exist in the model")]
    UnknownNode(usize),

    #[error("duplicate node {0} in {1}")]
    DuplicateNode(usize, String),

    #[error("node '{0}' is not referenced by any equation source")]
    DanglingNode(String),

    #[error("node '{0}' carries more than one support")]
    DoubleSupport(String),

    #[error("node '{0}' is not a support")]
    NotASupport(String),

    #[error("end node '{0}' has no external load rows")]
    MissingLoadRows(String),

    #[error("end node '{0}' is also used as a support")]
    LoadedSupport(String),

    #[error("system is not square: {rows} equations for {columns} unknowns ({breakdown})")]
    CountMismatch {
        rows: usize,
        columns: usize,
        breakdown: String,
    },

    #[error("applied wrench has a component along an unresisted direction {direction:?}")]
    UnresistedLoad { direction: [f64; 6] },

    #[error("system matrix is singular")]
    Singular,

    #[error("unsupported model content for this operation: {0}")]
    Unsupported(String),

    #[error("{path}: {message}")]
    Field { path: String, message: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl MsaError {
    pub fn field(path: impl Into<String>, message: impl Into<String>) -> Self {
        MsaError::Field {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable tag used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            MsaError::InvalidInput(_) => "invalid_input",
            MsaError::NotARotation { .. } => "not_a_rotation",
            MsaError::NotOrthonormal(_) => "not_orthonormal",
            MsaError::NotSpd(_) => "not_spd",
            MsaError::Asymmetric { .. } => "asymmetric",
            MsaError::UnknownNode(_) => "unknown_node",
            MsaError::DuplicateNode(..) => "duplicate_node",
            MsaError::DanglingNode(_) => "dangling_node",
            MsaError::DoubleSupport(_) => "double_support",
            MsaError::NotASupport(_) => "not_a_support",
            MsaError::MissingLoadRows(_) => "missing_load_rows",
            MsaError::LoadedSupport(_) => "loaded_support",
            MsaError::CountMismatch { .. } => "count_mismatch",
            MsaError::UnresistedLoad { .. } => "unresisted_load",
            MsaError::Singular => "singular",
            MsaError::Unsupported(_) => "unsupported",
            MsaError::Field { .. } => "field",
            MsaError::Parse { .. } => "parse",
            MsaError::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for MsaError {
    fn from(e: std::io::Error) -> Self {
        MsaError::Io(e.to_string())
    }
}
