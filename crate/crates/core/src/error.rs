use thiserror::Error;

/// Errors raised by the geometric and certification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty point set: the Hausdorff metric is undefined on the empty set")]
    EmptySet,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite coordinate in input")]
    NonFinite,

    #[error("general position not reached after {attempts} perturbation attempts")]
    PerturbationFailed { attempts: usize },

    #[error("subspace dimensions differ ({0} vs {1})")]
    SubspaceDimensionMismatch(usize, usize),

    #[error("frame is not orthonormal (residual {residual:e})")]
    NotOrthonormal { residual: f64 },

    #[error("certified nets are only available for ambient dimension <= 3 (got {0}); use sampled mode")]
    CertifiedNetUnavailable(usize),

    #[error("lambda undefined: no admissible subspaces for ambient dimension {0}")]
    LambdaUndefined(usize),

    #[error("point set is not in general position (margin {margin:e})")]
    NotInGeneralPosition { margin: f64 },

    #[error("too few points: need at least {required}, got {found}")]
    TooFewPoints { required: usize, found: usize },

    #[error("branch-and-bound exhausted its budget of {budget} cells (lb = {lb:e}, ub = {ub:e})")]
    BudgetExhausted { budget: usize, lb: f64, ub: f64 },

    #[error("chain precondition failed: {0}")]
    ChainPrecondition(String),

    #[error("regluing precondition failed: Hausdorff upper bound {ub:e} is not below delta {delta:e}")]
    ReglueTooFar { delta: f64, ub: f64 },

    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),

    #[error("invalid ball tree: {0}")]
    InvalidTree(String),

    #[error("input resolution too coarse: leaf radius {leaf_radius:e} leaves no room inside budget {budget:e}")]
    ResolutionTooCoarse { leaf_radius: f64, budget: f64 },

    #[error("leaf radius {leaf_radius:e} is below the floating-point resolution {floor:e} at these coordinates")]
    PrecisionExhausted { leaf_radius: f64, floor: f64 },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("stage budget exhausted at stage {stage} ({step}): remaining robustness radius {remaining:e}")]
    StageBudgetExhausted {
        stage: usize,
        step: String,
        remaining: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
