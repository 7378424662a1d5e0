use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not Hermitian (defect {defect:e} exceeds {bound:e})")]
    NotHermitian { defect: f64, bound: f64 },
    #[error("matrix is not positive (eigenvalue {min_eigenvalue:e} below {bound:e})")]
    NotPositive { min_eigenvalue: f64, bound: f64 },
    #[error("matrix is not a projection (eigenvalue deviation {deviation:e})")]
    NotProjection { deviation: f64 },
    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("elements belong to different modules")]
    ParentMismatch,
    #[error("element does not lie in its module (defect {defect:e})")]
    NotInModule { defect: f64 },
    #[error("singular value {value:e} lies within a factor 10 of the rank cutoff {cutoff:e}")]
    ToleranceAmbiguity { value: f64, cutoff: f64 },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("ill-conditioned: smallest singular value {sigma_min:e} below cutoff {cutoff:e}")]
    IllConditioned { sigma_min: f64, cutoff: f64 },
    #[error("unknown scenario kind `{0}`")]
    UnknownKind(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}
