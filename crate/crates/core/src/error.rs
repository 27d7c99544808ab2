use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("dimension {dim} exceeds the configured maximum {max}")]
    TooLarge { dim: usize, max: usize },

    #[error("frame columns are not orthonormal (residual {residual:.3e})")]
    NotOrthonormal { residual: f64 },

    #[error("eigen-iteration failed after {iterations} sweeps (residual {residual:.3e})")]
    EigenIterationFailed { iterations: usize, residual: f64 },

    #[error("ill-separated cluster: eigenvalues {a} and {b} are closer than {floor:.3e}")]
    IllSeparatedCluster { a: String, b: String, floor: f64 },

    #[error("Sylvester ill-conditioned: spectral gap {gap:.3e} below floor {floor:.3e}")]
    SylvesterIllConditioned { gap: f64, floor: f64 },

    #[error("not a complementary pair: {0}")]
    NotComplementaryPair(String),

    #[error("nearly degenerate idempotent: basis condition number {cond:.3e}")]
    NearlyDegenerateIdempotent { cond: f64 },

    #[error("not mutually annihilating: members {i} and {j} have product norm {norm:.3e}")]
    NotMutuallyAnnihilating { i: usize, j: usize, norm: f64 },

    #[error("empty idempotent family")]
    EmptyFamily,

    #[error("criterion mismatch: lattice criterion says {lattice}, commutator norm {commutator:.3e}")]
    CriterionMismatch { lattice: bool, commutator: f64 },

    #[error("operators {i} and {j} do not commute (commutator norm {norm:.3e})")]
    NonCommuting { i: usize, j: usize, norm: f64 },

    #[error("decomposition failed: {reason} (residual {residual:.3e})")]
    DecompositionFailed { reason: String, residual: f64 },

    #[error("boundary-ambiguous cluster at {point}: distance {distance:.3e} to region boundary")]
    BoundaryAmbiguous { point: String, distance: f64 },

    #[error("not an invariant subspace (residual {residual:.3e})")]
    NotInvariant { residual: f64 },

    #[error("ill-posed alpha: atom at distance {distance:.3e} from the singular hyperplane")]
    IllPosedAlpha { distance: f64 },

    #[error("grid does not contain spectrum: {0}")]
    GridTooSmall(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("format error: {0}")]
    Format(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
