use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |M - M†| = {asymmetry:e}")]
    NotHermitian { asymmetry: f64 },
    #[error("matrix is not unitary: max |U†U - I| = {defect:e}")]
    NotUnitary { defect: f64 },
    #[error("matrix is rank deficient: smallest singular value {singular_value:e}")]
    RankDeficient { singular_value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("state is not normalized: norm² = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },
    #[error("invalid spin {0}: must be a positive half-integer")]
    InvalidSpin(f64),
    #[error("invalid swap schedule: {0}")]
    InvalidSchedule(String),
    #[error(
        "state violates the swap orthogonality condition: |Σ|c_m|² e^(imπ)| = {value:e}"
    )]
    SwapOrthogonality { value: f64 },
    #[error("evolution on track {track} is not a spin swap: achieved overlap {overlap}")]
    NotASpinSwap { track: char, overlap: f64 },
    #[error("invalid rotation axis: {0}")]
    InvalidAxis(String),
    #[error("trajectory is not a closed loop in ray space: closure defect {defect:e}")]
    OpenLoop { defect: f64 },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("point ({x}, {y}) lies on the path (distance {distance:e})")]
    PointOnPath { x: f64, y: f64, distance: f64 },
    #[error("invalid field map: {0}")]
    InvalidField(String),
    #[error("eigenvalue cluster at {at:?}: {reason}")]
    GapCollapse { at: Vec<f64>, reason: String },
    #[error("ill-conditioned overlap between loop samples {index} and {next}: smallest singular value {singular_value}")]
    IllConditionedLoop {
        index: usize,
        next: usize,
        singular_value: f64,
    },
    #[error("invalid parameter loop: {0}")]
    InvalidLoop(String),
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("invalid braid word: {0}")]
    InvalidWord(String),
    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),
}
