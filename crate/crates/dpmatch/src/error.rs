use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("nonpositive weight {w} on edge ({i}, {j})")]
    NonPositiveWeight { i: usize, j: usize, w: f64 },
    #[error("capacity of vertex {0} must be at least 1")]
    BadCapacity(usize),
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("enumeration cap exceeded: {0}")]
    CapExceeded(String),
    #[error("sketch failure after {0} attempts")]
    SketchFailure(usize),
    #[error("promise violated on edge {edge}: value {value} outside [{lo}, {hi}]")]
    PromiseViolation { edge: usize, value: f64, lo: f64, hi: f64 },
    #[error("index mismatch: {0}")]
    IndexMismatch(String),
    #[error("iteration budget of {0} oracle calls exceeded")]
    BudgetExceeded(usize),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("condition A2 violated at vertex {0}")]
    DegreeCondition(usize),
    #[error("round cap of {0} exceeded")]
    RoundCap(usize),
    #[error("space budget exceeded: {used} > {limit}")]
    SpaceBudget { used: usize, limit: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
