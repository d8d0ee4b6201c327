use thiserror::Error;

/// Errors raised anywhere in the geometry → mesh → assembly → analysis pipeline.
#[derive(Debug, Error)]
pub enum VemError {
    #[error("invalid geometry ({entity}): {reason}")]
    InvalidGeometry { entity: String, reason: String },

    #[error("mesh validation failed for {entity}: {reason}")]
    Validation { entity: String, reason: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("cell {cell}: {source}")]
    InCell {
        cell: usize,
        #[source]
        source: Box<VemError>,
    },

    #[error("level {level}: {source}")]
    InLevel {
        level: usize,
        #[source]
        source: Box<VemError>,
    },

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl VemError {
    pub fn geometry(entity: impl Into<String>, reason: impl Into<String>) -> Self {
        VemError::InvalidGeometry {
            entity: entity.into(),
            reason: reason.into(),
        }
    }

    pub fn validation(entity: impl Into<String>, reason: impl Into<String>) -> Self {
        VemError::Validation {
            entity: entity.into(),
            reason: reason.into(),
        }
    }

    pub fn in_cell(self, cell: usize) -> Self {
        VemError::InCell {
            cell,
            source: Box::new(self),
        }
    }

    /// Innermost error once cell/level context is peeled off.
    pub fn root(&self) -> &VemError {
        match self {
            VemError::InCell { source, .. } | VemError::InLevel { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, VemError>;
