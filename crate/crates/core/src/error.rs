use thiserror::Error;

/// Errors raised while designing, loading or running a torus-layer code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid torus vector: {0}")]
    InvalidTorus(String),

    #[error("degenerate received point: radius {radius:e} in coordinate pair {pair}")]
    DegeneratePoint { pair: usize, radius: f64 },

    #[error("dimension {n} gives {n}! codewords, above the cap of {cap}")]
    DimensionTooLarge { n: usize, cap: usize },

    #[error("distance {d0} is outside the feasible range (0, {sup}) for N = {n}")]
    DistanceInfeasible { n: usize, d0: f64, sup: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("search radius {0} contains no candidate off the winding direction")]
    RadiusTooSmall(i64),

    #[error("lifting target is singular at w = {w}: diagonal entry {index} floors to zero")]
    SingularTarget { w: i64, index: usize },

    #[error("no best-lattice density constant for dimension {0}")]
    UnsupportedDimension(usize),

    #[error("expected {expected} windings, got {got}")]
    MismatchedLengths { expected: usize, got: usize },

    #[error("curve small-ball radius {curve_radius} needs layers {needed} apart, code has {layer_distance}")]
    SeparationViolation {
        curve_radius: f64,
        needed: f64,
        layer_distance: f64,
    },

    #[error("source value {0} outside [0, 1)")]
    OutOfRange(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
