use thiserror::Error;

/// Errors from tensor and matrix construction or shape-sensitive operations.
#[derive(Debug, Error)]
pub enum TensorError {
    #[error("tensor must have at least one dimension")]
    NoDimensions,
    #[error("dimension {dim} has zero length")]
    ZeroLength { dim: usize },
    #[error("data length {got} does not match shape product {expected}")]
    DataLength { got: usize, expected: usize },
    #[error("dimension index {dim} out of range for order-{order} tensor")]
    DimOutOfRange { dim: usize, order: usize },
    #[error("matrix shape {rows}x{cols} incompatible with operand {other_rows}x{other_cols}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        other_rows: usize,
        other_cols: usize,
    },
    #[error("contraction matrix has {got} columns, dimension {dim} has length {expected}")]
    ContractionMismatch {
        got: usize,
        dim: usize,
        expected: usize,
    },
    #[error("empty factor vector in rank-1 construction")]
    EmptyFactor,
    #[error("index permutation {0:?} is not a permutation of the tensor dimensions")]
    BadPermutation(Vec<usize>),
}

/// Errors from signal synthesis, noise generation and metric evaluation.
#[derive(Debug, Error)]
pub enum SignalError {
    #[error("noise variance must be nonnegative, got {0}")]
    NegativeVariance(f64),
    #[error("cannot derive a noise level for an all-zero signal")]
    ZeroSignal,
    #[error("signal spec must contain at least one mode")]
    NoModes,
    #[error("mode has {got} per-dimension parameters, spec has {expected} dimensions")]
    ModeArity { got: usize, expected: usize },
    #[error("trial {trial} supplies {got} modes, truth has {expected}")]
    TrialModeCount {
        trial: usize,
        got: usize,
        expected: usize,
    },
    #[error("mode matching supports at most {max} modes, got {got}")]
    TooManyModes { got: usize, max: usize },
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Errors from grid construction and dictionary refinement.
#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid needs at least {min} points, got {got}")]
    TooFewPoints { got: usize, min: usize },
    #[error("grid points must be strictly increasing")]
    NotSorted,
    #[error("frequency grid point {0} outside [0,1)")]
    FrequencyRange(f64),
    #[error("damping grid point {0} must be nonpositive")]
    DampingRange(f64),
    #[error("damping lower bound must be negative, got {0}")]
    BadLowerBound(f64),
    #[error("refinement needs a nonempty set of activated atoms")]
    EmptyActiveSet,
    #[error("activated index {idx} out of range for grid of {len} points")]
    ActiveOutOfRange { idx: usize, len: usize },
    #[error("refinement count eta must be at least 1")]
    BadEta,
    #[error("capture-zone constant is defined for signal length >= 3, got {0}")]
    LengthTooShort(usize),
}

/// Errors from the simultaneous sparse approximation solver.
#[derive(Debug, Error)]
pub enum SompError {
    #[error("dictionary has {dict_rows} rows, data has {data_rows}")]
    DimensionMismatch { dict_rows: usize, data_rows: usize },
    #[error("all remaining candidate atoms are linearly dependent on the selection")]
    DegenerateDictionary,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Errors from the single- and multiple-tone estimators.
#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("no dimensions requested")]
    EmptyDims,
    #[error("dimension {dim} has a single sample; its frequency is unidentifiable")]
    DegenerateDimension { dim: usize },
    #[error("dimension index {dim} out of range for order-{order} tensor")]
    DimOutOfRange { dim: usize, order: usize },
    #[error("estimator input is identically zero")]
    ZeroData,
    #[error("mode count {f} must be smaller than the first dimension length {m1}")]
    TooManyModes { f: usize, m1: usize },
    #[error("multiple-tone estimation needs at least two samples in every trailing dimension")]
    TrailingDimTooShort,
    #[error("multiple-tone estimation needs an order-2 or higher tensor")]
    OrderTooLow,
    #[error("signal subspace collapsed: singular value {idx} is numerically zero")]
    RankCollapse { idx: usize },
    #[error("shift-invariance eigenproblem is defective; dimension-1 modes likely coincide")]
    DefectivePencil,
    #[error("estimated dimension-1 mode matrix is rank deficient")]
    RankDeficientModes,
    #[error(transparent)]
    Somp(#[from] SompError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Errors from Fisher-information and bound computations.
#[derive(Debug, Error)]
pub enum CrlbError {
    #[error("parameter vector length {got} does not match 2RF+2F = {expected}")]
    ThetaLength { got: usize, expected: usize },
    #[error("mode magnitudes must be positive")]
    NonPositiveMagnitude,
    #[error("noise variance must be positive, got {0}")]
    BadVariance(f64),
    #[error("Fisher information matrix is singular or indefinite")]
    SingularFisher,
    #[error("Fisher information matrix too ill-conditioned (cond ~ {cond:.3e}); bounds would be meaningless")]
    IllConditioned { cond: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Wrapper for failures inside the LAPACK-backed kernels.
#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("linear algebra backend failure: {0}")]
    Backend(String),
    #[error("matrix is numerically rank deficient")]
    RankDeficient,
}

impl From<ndarray_linalg::error::LinalgError> for LinalgError {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        LinalgError::Backend(e.to_string())
    }
}
