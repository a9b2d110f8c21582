use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {0} is below 2")]
    DimensionTooSmall(usize),
    #[error("dimension {0} is not prime; no full set of mutually unbiased bases is constructed")]
    NonPrimeDimension(usize),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("probability vector sums to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("channel is not completely positive (min p = {min_prob:e})")]
    NotCompletelyPositive { min_prob: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("mixing weights are not on the probability simplex: {0}")]
    NotOnSimplex(String),
    #[error("invalid weight function: {0}")]
    InvalidWeight(String),
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("degenerate denominator in mu at t = {t} (index {index})")]
    DegenerateDenominator { t: f64, index: usize },
    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),
    #[error("empty time grid")]
    EmptyGrid,
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("number of negative rates k = {k} is outside 1..={max}")]
    InvalidK { k: usize, max: usize },
    #[error("({x1}, {x2}, {x3}) lies in none of the boundary branch domains")]
    OutOfBranchDomain { x1: f64, x2: f64, x3: f64 },
    #[error("region scans are only supported for d = 3 (got {0})")]
    UnsupportedDimension(usize),
    #[error("grid resolution {0} is below 11")]
    InvalidResolution(usize),
    #[error("intermediate map is singular at s = {s} (|lambda| = {value:e})")]
    SingularIntermediateMap { s: f64, value: f64 },
    #[error("negative weight derivative {value} for index {index} at t = {t}")]
    NegativeWeightDerivative { t: f64, index: usize, value: f64 },
    #[error("integration step size underflow at t = {0}")]
    StepSizeUnderflow(f64),
    #[error("unknown fixture '{0}'")]
    UnknownFixture(String),
}
