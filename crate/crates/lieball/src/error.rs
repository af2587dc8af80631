use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not symmetric (defect {defect:.3e})")]
    NotSymmetric { defect: f64 },
    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },
    #[error("eigeniteration failed to converge")]
    NoConvergence,
    #[error("input vectors are not orthonormal (defect {defect:.3e})")]
    NotOrthonormal { defect: f64 },
    #[error("pole: denominator vanishes")]
    Pole,
    #[error("sqrt argument at branch point")]
    BranchPoint,
    #[error("sqrt argument on the branch cut: not differentiable")]
    NotDifferentiable,
    #[error("point is not in the interior of the domain")]
    NotInterior,
    #[error("image point is not in the interior of the target")]
    TargetNotInterior,
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("invalid group element (defect {defect:.3e})")]
    InvalidElement { defect: f64 },
    #[error("component is not polynomial")]
    NotPolynomial,
    #[error("sum-of-norm-squares forms differ (defect {defect:.3e})")]
    NormMismatch { defect: f64 },
    #[error("no unitary solution within tolerance")]
    NoSolution,
    #[error("map is not normalized: f(0) != 0")]
    NotNormalized,
    #[error("map is not an isometry (residual {residual:.3e})")]
    NotIsometry { residual: f64 },
    #[error("unitary recovery failed: {0}")]
    RecoveryFailed(String),
    #[error("unitary lacks the isometry structure: {0}")]
    StructureViolation(String),
    #[error("component is not analytic at the origin")]
    NotAnalyticAtOrigin,
    #[error("map is not in normal form: {0}")]
    NotNormalForm(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
