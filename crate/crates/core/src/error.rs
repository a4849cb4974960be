use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown node label `{0}`")]
    UnknownNode(String),

    #[error("duplicate node label `{0}`")]
    DuplicateNode(String),

    #[error("self-pair capacitance on node `{0}`")]
    SelfPair(String),

    #[error("negative capacitance {value} fF on {what}")]
    NegativeCapacitance { what: String, value: f64 },

    #[error("node order must be a permutation of the network nodes: {0}")]
    OrderMismatch(String),

    #[error("node `{0}` appears more than once in the pair/passthrough partition")]
    OverlappingPartition(String),

    #[error("unknown mode label `{0}`")]
    UnknownMode(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular{}", mode.as_ref().map(|m| format!(" (mode `{m}` decouples)")).unwrap_or_default())]
    Singular { mode: Option<String> },

    #[error("matrix condition number {cond:.3e} exceeds {limit:.0e}{}", mode.as_ref().map(|m| format!(" (weakest mode `{m}`)")).unwrap_or_default())]
    IllConditioned {
        cond: f64,
        limit: f64,
        mode: Option<String>,
    },

    #[error("E_J/E_C = {ej}/{ec} = {ratio:.3} is below the transmon regime guard {min_ratio}")]
    Regime {
        ec: f64,
        ej: f64,
        ratio: f64,
        min_ratio: f64,
    },

    #[error("invalid SQUID: {0}")]
    InvalidSquid(String),

    #[error(
        "charge basis n_max = {n_max} too small: level {level} has boundary weight {weight:.3e}"
    )]
    Truncation {
        n_max: usize,
        level: usize,
        weight: f64,
    },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("no resonance found: {0}")]
    NoResonance(String),

    #[error("fit did not converge after {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("path `{path}`: {message}")]
    Path { path: String, message: String },

    #[error("layout parse error at line {line}, column {column}: {message}")]
    LayoutSyntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("placement references unknown path `{0}`")]
    DanglingPath(String),

    #[error("{field}: {message}")]
    Field { field: String, message: String },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub(crate) trait ResultExt<T> {
    fn context(self, context: impl Into<String>) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context(self, context: impl Into<String>) -> Result<T> {
        self.map_err(|e| e.context(context))
    }
}
