use crate::geometry::Cell;

/// Errors produced by the workbench core.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("cell ({}, {}) is outside the grid", .0.col, .0.row)]
    OutOfBounds(Cell),
    #[error("invalid layer: {0}")]
    InvalidLayer(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cell ({}, {}) is impassable", .0.col, .0.row)]
    Impassable(Cell),
    #[error("no path from ({}, {}) to ({}, {})", .from.col, .from.row, .to.col, .to.row)]
    Unreachable { from: Cell, to: Cell },
    #[error("invalid demonstration: {0}")]
    InvalidDemonstration(String),
    #[error("no demonstrations supplied")]
    NoDemonstrations,
    #[error("invalid training budget: {0}")]
    InvalidBudget(String),
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error("no trials to summarize")]
    NoTrials,
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable identifier for the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidGeometry(_) => "invalid_geometry",
            Error::GeometryMismatch(_) => "geometry_mismatch",
            Error::OutOfBounds(_) => "out_of_bounds",
            Error::InvalidLayer(_) => "invalid_layer",
            Error::InvalidSchema(_) => "invalid_schema",
            Error::SchemaMismatch(_) => "schema_mismatch",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Impassable(_) => "impassable",
            Error::Unreachable { .. } => "unreachable",
            Error::InvalidDemonstration(_) => "invalid_demonstration",
            Error::NoDemonstrations => "no_demonstrations",
            Error::InvalidBudget(_) => "invalid_budget",
            Error::EmptyTrajectory => "empty_trajectory",
            Error::InvalidTrajectory(_) => "invalid_trajectory",
            Error::NoTrials => "no_trials",
            Error::InvalidScenario(_) => "invalid_scenario",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
