use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode of the numerical contracts.
///
/// Variants fall in two groups: input/usage problems (invalid specs, grids,
/// schema errors) and numerical-contract violations (aliasing, singular
/// orders, quadrature that failed to converge). [`Error::is_numerical`]
/// tells them apart; the CLI maps them to different exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid source spec: {0}")]
    InvalidSpec(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("source support [{lo:e}, {hi:e}] m does not fit the grid window [{win_lo:e}, {win_hi:e}] m")]
    GridTooNarrow {
        lo: f64,
        hi: f64,
        win_lo: f64,
        win_hi: f64,
    },
    #[error("target grid [{lo:e}, {hi:e}] lies outside the source window [{win_lo:e}, {win_hi:e}]")]
    OutOfRange {
        lo: f64,
        hi: f64,
        win_lo: f64,
        win_hi: f64,
    },
    #[error("fractional order {alpha} rad is near-singular (|sin| = {sin_abs:.3e} < {s_min})")]
    NearSingularOrder { alpha: f64, sin_abs: f64, s_min: f64 },
    #[error("input grid aliases the chirp: {0}")]
    AliasedInput(String),
    #[error("sin(omega t) vanishes at omega t = {0}")]
    SingularTime(f64),
    #[error("mu = z/R_A = {mu} is outside the photon-propagator branch (0, 2)")]
    OutOfBranch { mu: f64 },
    #[error("no real nonzero epsilon solves the curvature relation: {0}")]
    NoRealSolution(String),
    #[error("fractional order must be positive, got {0}")]
    NonpositiveOrder(f64),
    #[error("propagation distance must be positive, got {0}")]
    NonpositiveDistance(f64),
    #[error("asymptotic line-source kernel invalid: min k*r = {0:.3e} < 100")]
    KrTooSmall(f64),
    #[error("fields do not share a common window")]
    GridMismatch,
    #[error("source and field points coincide")]
    CoincidentPoints,
    #[error("field point within {guard:e} m of the source (distance {distance:e} m)")]
    TooCloseToSingularity { distance: f64, guard: f64 },
    #[error("quadrature did not converge (last estimate change {0:e})")]
    QuadratureNotConverged(f64),
    #[error("detector window [{lo:e}, {hi:e}] m is outside the intensity grid")]
    OutOfWindow { lo: f64, hi: f64 },
    #[error("model expectations too small to form chi-square bins: {0}")]
    DegenerateModel(String),
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// `true` for violations of a numerical contract (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NearSingularOrder { .. }
                | Error::AliasedInput(_)
                | Error::SingularTime(_)
                | Error::OutOfBranch { .. }
                | Error::NoRealSolution(_)
                | Error::KrTooSmall(_)
                | Error::QuadratureNotConverged(_)
                | Error::TooCloseToSingularity { .. }
                | Error::DegenerateModel(_)
                | Error::GridMismatch
                | Error::CoincidentPoints
        )
    }

    /// Short machine-readable tag, e.g. `"AliasedInput"`.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::GridTooNarrow { .. } => "GridTooNarrow",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::NearSingularOrder { .. } => "NearSingularOrder",
            Error::AliasedInput(_) => "AliasedInput",
            Error::SingularTime(_) => "SingularTime",
            Error::OutOfBranch { .. } => "OutOfBranch",
            Error::NoRealSolution(_) => "NoRealSolution",
            Error::NonpositiveOrder(_) => "NonpositiveOrder",
            Error::NonpositiveDistance(_) => "NonpositiveDistance",
            Error::KrTooSmall(_) => "KrTooSmall",
            Error::GridMismatch => "GridMismatch",
            Error::CoincidentPoints => "CoincidentPoints",
            Error::TooCloseToSingularity { .. } => "TooCloseToSingularity",
            Error::QuadratureNotConverged(_) => "QuadratureNotConverged",
            Error::OutOfWindow { .. } => "OutOfWindow",
            Error::DegenerateModel(_) => "DegenerateModel",
            Error::Schema { .. } => "SchemaError",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
