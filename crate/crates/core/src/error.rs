//! Error types shared across the solver.

/// Everything that can go wrong while building or running a solve.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("non-physical state: {0}")]
    NonPhysical(String),

    #[error("state is not supersonic: {0}")]
    NonSupersonic(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("out of region: {0}")]
    OutOfRegion(String),

    #[error("characteristic segments do not intersect: {0}")]
    NoIntersection(String),

    #[error("corrector did not converge after {iters} iterations (residual {residual:e})")]
    CorrectorDiverged { iters: usize, residual: f64 },

    /// Sound speed fell below the vacuum cutoff while closing a point.
    /// Carries the abscissa where it happened and the clamped sound speed,
    /// which the wall sweep uses to localize the interface.
    #[error("vacuum reached at x={x} (c={c:e})")]
    VacuumReached { x: f64, c: f64 },

    #[error("characteristic does not reach the wall: {0}")]
    NoWallHit(String),

    #[error("degenerate characteristic crossing (angle {angle:e} rad)")]
    DegenerateCrossing { angle: f64 },

    #[error("inlet profile violates ({clause}): {detail}")]
    ProfileViolation { clause: String, detail: String },

    #[error("streamline foot outside front: {0}")]
    FootOutsideFront(String),

    #[error("station x={0} lies outside the gas region")]
    StationOutsideGas(f64),

    #[error("case (ii): the cross characteristic from P does not reach the wall before x_max")]
    CaseTwoDetected,

    #[error("region sweep left open: {0}")]
    RegionOpen(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
