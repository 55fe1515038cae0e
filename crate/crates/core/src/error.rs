use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown map `{0}`")]
    UnknownMap(String),
    #[error("unknown manifold `{0}`")]
    UnknownManifold(String),
    #[error("manifold mismatch: expected {expected}, found {found}")]
    ManifoldMismatch { expected: String, found: String },
    #[error("point does not lie on {manifold} (deviation {deviation:e})")]
    OffManifold { manifold: String, deviation: f64 },
    #[error("map is not smooth at this point: {0}")]
    NonSmoothPoint(String),
    #[error("retraction failed: {0}")]
    DegenerateRetraction(String),
    #[error("tangent frame construction degenerated at this point; resample")]
    DegenerateFrame,
    #[error("degree requires equal dimensions (source {source_dim}, target {target_dim})")]
    DimensionMismatch {
        source_dim: usize,
        target_dim: usize,
    },
    #[error("no regular target found within a budget of {attempts} attempts")]
    TargetBudgetExhausted { attempts: usize },
    #[error("engine disagreement across targets: signed sums {0:?}")]
    Disagreement(Vec<i64>),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("Monte Carlo standard error {stderr:e} too large to round confidently")]
    StderrTooLarge { stderr: f64 },
    #[error("g(A) left SU(3) (deviation {0:e}); the entry transcription is inconsistent")]
    InconsistentG(f64),
    #[error("cohomology class of degree {0} is not in the domain of Sq^2 here")]
    WrongDegree(u32),
    #[error("ring elements live on different spaces or coefficient rings")]
    TagMismatch,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
