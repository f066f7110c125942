use thiserror::Error;

/// Errors raised by constructions, validators and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("invalid squared-mass target: {0}")]
    InvalidSquaredMass(f64),

    #[error("construction too large: projected {what} {projected:e} exceeds cap {cap:e}")]
    TooLarge { what: &'static str, projected: f64, cap: f64 },

    #[error("leaf-pair enumeration of {pairs:e} pairs exceeds cap {cap:e}; use analytic_two_point")]
    EnumerationCap { pairs: f64, cap: f64 },

    #[error("node {0} is not a leaf")]
    NotALeaf(usize),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("empty grid")]
    EmptyGrid,

    #[error("invalid envelope: {0}")]
    InvalidEnvelope(String),

    #[error("invalid kappa sequence: {0}")]
    InvalidKappa(String),

    #[error("positivity radius too small: {0}")]
    PositivityRadius(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("epsilon search failed: {0}")]
    EpsilonSearch(String),

    #[error("p0 not found: {0}")]
    P0NotFound(String),

    #[error("alpha bound violated: alpha = {alpha} >= 1/(1-3 beta) = {bound}")]
    AlphaBound { alpha: f64, bound: f64 },

    #[error("domination certificate failed at level {level}: {detail}")]
    Certification { level: usize, detail: String },

    #[error("decomposition level {level}: {source}")]
    Level {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("schema mismatch: expected {expected}, found {found}")]
    Schema { expected: String, found: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
