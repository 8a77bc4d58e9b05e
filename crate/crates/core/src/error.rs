use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("layout conflict: label `{0}` appears more than once")]
    LayoutConflict(String),
    #[error("degenerate layout: {0}")]
    DegenerateLayout(String),
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),
    #[error("dimension mismatch: expected {expected}, found {found} ({context})")]
    DimensionMismatch {
        expected: usize,
        found: usize,
        context: String,
    },
    #[error("state is not normalized: norm {0:.3e} deviates from 1")]
    NotNormalized(f64),
    #[error("matrix is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),
    #[error("vectors are not orthonormal (residual {0:.3e})")]
    NotOrthonormal(f64),
    #[error("operator is not a projector (residual {0:.3e})")]
    NotProjector(f64),
    #[error("invalid decomposition of the identity: {0}")]
    InvalidDecomposition(String),
    #[error("operator is not unitary (residual {0:.3e})")]
    NotUnitary(f64),
    #[error("instrument dimension {instrument} is smaller than the number of branches {branches}")]
    InstrumentTooSmall { instrument: usize, branches: usize },
    #[error("pointer state {index} lies outside the range of its pointer projector (residual {residual:.3e})")]
    PointerStateOutsideRange { index: usize, residual: f64 },
    #[error("dressing {index} leaks outside its pointer projector range (residual {residual:.3e})")]
    DressingLeak { index: usize, residual: f64 },
    #[error("observable mismatch between chain links: {0}")]
    ObservableMismatch(String),
    #[error("conditional state undefined: occurrence probability {0:.3e} is not positive")]
    UndefinedConditional(f64),
    #[error("relative state undefined: overlap norm {0:.3e} vanishes")]
    VanishingOverlap(f64),
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("no accepted samples out of {0}")]
    NoAcceptedSamples(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn dim(expected: usize, found: usize, context: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            expected,
            found,
            context: context.into(),
        }
    }
}
