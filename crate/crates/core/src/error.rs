use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("operator is not hermitian (defect {defect:.3e})")]
    NonHermitianInput { defect: f64 },
    #[error("schedule segment {index} carries a non-hermitian hamiltonian (defect {defect:.3e})")]
    NonHermitianSegment { index: usize, defect: f64 },
    #[error("operator is not unitary (defect {defect:.3e})")]
    NonUnitaryInput { defect: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator does not commute with the control-qubit sigma_z (defect {defect:.3e})")]
    NotBlockDiagonal { defect: f64 },
    #[error("conditional block does not commute with sigma_x (defect {defect:.3e})")]
    NotXDiagonal { defect: f64 },
    #[error("rotations in the sequence use different axes")]
    MixedAxes,
    #[error("cumulative pulse rotation does not return to identity (defect {defect:.3e})")]
    NonClosingFrame { defect: f64 },
    #[error("evolution is not cyclic: |<psi0|psiT>| = {overlap:.12}")]
    NotCyclic { overlap: f64 },
    #[error("bloch path is not closed (endpoint gap {gap:.3e})")]
    OpenPath { gap: f64 },
    #[error("consecutive bloch points {index} and {next} are too far apart", next = index + 1)]
    DegenerateStep { index: usize },
    #[error("trajectory does not match schedule: {0}")]
    MismatchedTrajectory(String),
    #[error("not a valid density matrix: {0}")]
    InvalidDensity(String),
    #[error("accounting {accounting} is incompatible with {reason}")]
    IncompatibleAccounting {
        accounting: &'static str,
        reason: &'static str,
    },
}

impl Error {
    /// Whether the failure is numerical (the inputs were well-formed but the
    /// computation produced something outside tolerance) rather than a
    /// validation failure.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonHermitianSegment { .. }
                | Error::NonUnitaryInput { .. }
                | Error::NotBlockDiagonal { .. }
                | Error::NotXDiagonal { .. }
                | Error::NotCyclic { .. }
                | Error::OpenPath { .. }
                | Error::DegenerateStep { .. }
                | Error::InvalidDensity(_)
        )
    }
}
