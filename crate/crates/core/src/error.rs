use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("group variant mismatch: {left} vs {right}")]
    VariantMismatch { left: String, right: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("matrix is not anti-Hermitian (max deviation {deviation:.3e})")]
    NotAntiHermitian { deviation: f64 },
    #[error("path-ordered exponential over mixed Lie algebra variants")]
    MixedLieVariants,

    #[error("invalid cover: {0}")]
    InvalidCover(String),
    #[error("cover is disconnected: region '{unreachable}' is not reachable from the base")]
    DisconnectedCover { unreachable: String },
    #[error("unknown region '{0}'")]
    UnknownRegion(String),
    #[error("regions '{from}' and '{to}' do not overlap (component {component:?})")]
    NoOverlap { from: String, to: String, component: Option<u32> },
    #[error("path endpoints do not match: '{end}' vs '{start}'")]
    EndpointMismatch { end: String, start: String },
    #[error("path is not a loop: starts at '{start}', ends at '{end}'")]
    NotALoop { start: String, end: String },
    #[error("circle cover needs at least 3 regions, got {0}")]
    CircleTooSmall(usize),
    #[error("unknown builtin topology '{0}'")]
    UnknownBuiltin(String),

    #[error("no value assigned to generator '{0}'")]
    MissingGenerator(String),
    #[error("phase morphism violates {count} relation(s) (max residual {max_residual:.3e})")]
    InvalidSigma { count: usize, max_residual: f64 },
    #[error("transition cocycle fails the cocycle identity (max residual {max_residual:.3e})")]
    InconsistentCocycle { max_residual: f64 },
    #[error("no cocycle value for overlap ({to}, {from}, component {component})")]
    MissingEdge { to: String, from: String, component: u32 },
    #[error("operation requires a U(1) value, got {0}")]
    NotU1(String),
    #[error("potential has no primitives on the requested regions: {0}")]
    NotTrivializable(String),
    #[error("edge angles are not flat on triangle {triangle}: residual {residual:.3e}")]
    NotFlat { triangle: usize, residual: f64 },

    #[error("{modes} modes exceed the supported capacity of {max}")]
    Capacity { modes: usize, max: usize },
    #[error("one-particle vector is not supported in region '{0}'")]
    NotSupportedIn(String),
    #[error("section is inconsistent across overlaps (residual {residual:.3e})")]
    InconsistentSection { residual: f64 },
    #[error("supports are not causally disjoint: '{a}' and '{b}'")]
    NotCausallyDisjoint { a: String, b: String },
    #[error("operator has mixed parity")]
    MixedParity,
    #[error("operator has mixed charge grade")]
    MixedGrade,
    #[error("operator is not gauge invariant (grade {0})")]
    NotGaugeInvariant(i32),

    #[error("region '{region}' owns {available} modes, charge needs {needed}")]
    InsufficientModes { region: String, needed: usize, available: usize },
    #[error("no transporter entry for step '{from}' -> '{to}' (component {component})")]
    MissingTransporter { to: String, from: String, component: u32 },
    #[error("transporter has no Fock realization (cocycle layer only)")]
    NoFockRealization,
    #[error("loop transport does not compress to a scalar on the window (residual {residual:.3e})")]
    NonScalarCompression { residual: f64 },

    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("scenario field '{field}': {message}")]
    Schema { field: String, message: String },
    #[error("task '{task}' exceeded its {secs}s timeout")]
    Timeout { task: String, secs: u64 },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
