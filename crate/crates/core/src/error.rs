use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("undeclared edge `{edge}` at line {line}, column {column}")]
    UndeclaredEdge {
        edge: String,
        line: usize,
        column: usize,
    },
    #[error("face {face}: word does not chain into a closed loop at letter {position}")]
    NonChainingWord { face: usize, position: usize },
    #[error("edge `{0}` is declared twice")]
    DuplicateEdge(String),
    #[error("the 1-skeleton is disconnected")]
    Disconnected,
    #[error("edge name `{0}` already exists")]
    NameCollision(String),
    #[error("word references the new edge `{0}`")]
    WordReferencesNewEdge(String),
    #[error("edge `{0}` cannot be collapsed: it must occur exactly once, in exactly one face")]
    NotCollapsible(String),
    #[error("unknown builtin foam `{0}`")]
    UnknownBuiltin(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("foam must be reduced (one vertex) for this operation")]
    NotReduced,
    #[error("logarithm requested within {eps:e} of the cut locus (class angle {angle})")]
    CutLocus { angle: f64, eps: f64 },
    #[error("heat-kernel time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("group mismatch: {0}")]
    GroupMismatch(String),
    #[error("descent did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("cut-locus restarts exhausted ({0} restarts)")]
    RestartBudget(usize),
    #[error("no flat connection found within budget")]
    NoFlatConnection,
    #[error("rank decision is ill-conditioned (singular-value gap {0:.3e})")]
    IllConditioned(f64),
    #[error("connection is flagged as possibly singular")]
    SingularConnection,
    #[error("isotropy type differs from the component's modal value (b0 = {found}, expected {expected})")]
    IsotropyMismatch { found: usize, expected: usize },
    #[error("zero pivot in {0}: rank classification is inconsistent")]
    ZeroPivot(&'static str),
    #[error("tau = {tau} is below the Monte Carlo floor {floor}; use a character-sum evaluator")]
    BelowMcFloor { tau: f64, floor: f64 },
    #[error("divergent character series: {0}")]
    Divergent(String),
    #[error("scaling fit: {0}")]
    Fit(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;
