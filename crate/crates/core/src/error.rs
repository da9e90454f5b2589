use thiserror::Error;

/// Errors raised by the algebra engine.
///
/// Axiom violations found by [`crate::algebra::ItoAlgebraSpec::validate`] are
/// report content, not errors; these variants cover malformed input and
/// structural failures of the downstream constructions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ItoError {
    #[error("elements belong to different algebra specs")]
    SpecMismatch,
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("operator basis does not span a *-closed algebra: {0}")]
    NotAnAlgebra(String),
    #[error("density matrix is not faithful (smallest eigenvalue {min_eigenvalue:e})")]
    StateNotFaithful { min_eigenvalue: f64 },
    #[error("Gram matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e}, max {max_eigenvalue:e})")]
    GramNotPsd { min_eigenvalue: f64, max_eigenvalue: f64 },
    #[error("GNS left action is inconsistent for basis element {index} (residual {residual:e})")]
    GnsInconsistent { index: usize, residual: f64 },
    #[error("quadruple ranks differ: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("operator image has no unit (residual {residual:e})")]
    NoUnit { residual: f64 },
    #[error("corrected supporting element is not idempotent (residual {residual:e})")]
    NotIdempotent { residual: f64 },
    #[error("spec was not produced by the vacuum builder")]
    NotVacuumBuilder,
    #[error("spec was not produced by a thermal-type builder")]
    NotThermalBuilder,
    #[error("algebra is not commutative: basis pair ({i}, {j}) residual {residual:e}")]
    NotCommutative { i: usize, j: usize, residual: f64 },
    #[error("joint diagonalization failed (off-diagonal residual {residual:e})")]
    DiagonalizationFailed { residual: f64 },
    #[error("path bundle does not match the canonical form: {0}")]
    MismatchedBundle(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl ItoError {
    /// True for failures of the algebraic constructions (as opposed to bad
    /// input shapes, parameters or parse errors).
    pub fn is_structural(&self) -> bool {
        !matches!(
            self,
            ItoError::Shape(_) | ItoError::InvalidParameter(_) | ItoError::Parse { .. }
        )
    }
}

impl From<serde_json::Error> for ItoError {
    fn from(e: serde_json::Error) -> Self {
        ItoError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, ItoError>;
