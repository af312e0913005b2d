use thiserror::Error;

/// Errors raised by the numerical laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate box on axis {axis}: lower {lower} must be below upper {upper}")]
    DegenerateBox { axis: usize, lower: f64, upper: f64 },

    #[error("grid resolution {resolution} on axis {axis} is below the minimum of 3")]
    ResolutionTooCoarse { axis: usize, resolution: usize },

    #[error("grid would hold {points} points, above the configured cap of {cap}")]
    GridTooLarge { points: usize, cap: usize },

    #[error("field has {got} values but the grid holds {expected} points")]
    FieldSizeMismatch { expected: usize, got: usize },

    #[error("every grid point of the field is masked")]
    AllMasked,

    #[error("unknown mapping `{0}`")]
    UnknownMapping(String),

    #[error("malformed mapping spec `{0}`")]
    MalformedSpec(String),

    #[error("point {0:?} lies outside the mapping domain")]
    OutsideDomain(Vec<f64>),

    #[error("point {0:?} lies on the exceptional set of the mapping")]
    ExceptionalPoint(Vec<f64>),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix DF^T DF is singular")]
    SingularMatrix,

    #[error("radius {radius} is outside the bump domain |y| < e^-e")]
    OutsideBumpDomain { radius: f64 },

    #[error("radial n-Laplacian is undefined at r = 0")]
    RadiusZero,

    #[error("no certified head value in the configured range; best near miss has maximum {best_max}")]
    NoCertifiedHead { best_max: f64 },

    #[error("bump profile fails the C^1 flux property: {0}")]
    FluxNotC1(String),

    #[error("cutoff support (radius {radius}) exceeds the grid box")]
    SupportExceedsGrid { radius: f64 },

    #[error("image F(x) = {0:?} escapes the ball |y| < e^-e")]
    ImageEscapes(Vec<f64>),

    #[error("dilatation is infinite on an unmasked grid point {0:?}")]
    InfiniteDilatation(Vec<f64>),

    #[error("excision swallows the whole grid")]
    ExcisionSwallowsGrid,

    #[error("exact sign could not be decided")]
    UndecidedSign,
}

pub type Result<T> = std::result::Result<T, Error>;
