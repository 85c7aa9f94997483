use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("parallel edge {{{0}, {1}}}")]
    ParallelEdge(usize, usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeparationError {
    #[error("separator needs {required} vertices but the budget is {budget:.3}")]
    BudgetExceeded { required: usize, budget: f64 },
    #[error("graph has an isolated vertex {0}")]
    IsolatedVertex(usize),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("strategy cannot handle a component of order {order}: {reason}")]
    StrategyFailed { order: usize, reason: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IsoTypeError {
    #[error("component order {order} outside [{min}, {max}]")]
    SizeOutOfRange {
        order: usize,
        min: usize,
        max: usize,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesignError {
    #[error("no resolvable K_{m}-decomposition of K_{n} is constructible; nearest supported order: {nearest:?}")]
    UnsupportedParameters {
        n: usize,
        m: usize,
        nearest: Option<usize>,
    },
    #[error("target eta not reached: achieved {achieved:.4}")]
    EtaNotReached { achieved: f64 },
    #[error("pattern on {pattern} vertices does not fit in K_{l}")]
    PatternTooLarge { pattern: usize, l: usize },
    #[error("K_m block is full")]
    Full,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssignError {
    #[error("type with {v} vertices does not fit a chunk in K_{m} at eta {eta:.4}")]
    TypeTooLarge { v: usize, m: usize, eta: f64 },
    #[error("ran out of K_m-factors while assigning graph {graph}")]
    OutOfFactors { graph: usize },
    #[error("graph {graph} violates the fit inequality: {lhs:.2} > {rhs}")]
    FitViolated { graph: usize, lhs: f64, rhs: usize },
    #[error(transparent)]
    Design(#[from] DesignError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BalanceError {
    #[error("max boundary degree {max_found} above {bound:.2} after {attempts} attempts")]
    BalancednessNotReached {
        max_found: usize,
        bound: f64,
        attempts: usize,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmbedError {
    #[error("no candidate in Y for separator vertex {vertex} of graph {graph} (dominant constraint: {dominant})")]
    NoCandidate {
        graph: usize,
        vertex: usize,
        dominant: String,
    },
    #[error("per-graph separator of graph {graph} has {size} vertices but |Y| = {y}")]
    ReserveTooSmall { graph: usize, size: usize, y: usize },
    #[error("usage cap exceeded at host {host}")]
    UsageCapExceeded { host: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("parameter plan infeasible: {0}")]
    Infeasible(String),
}

/// A failure of one pipeline stage, tagged with the stage name.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("planning: {0}")]
    Plan(#[from] PlanError),
    #[error("separation of graph {graph}: {source}")]
    Separation {
        graph: usize,
        source: SeparationError,
    },
    #[error("iso-types: {0}")]
    IsoType(#[from] IsoTypeError),
    #[error("designs: {0}")]
    Design(#[from] DesignError),
    #[error("assignment: {0}")]
    Assign(#[from] AssignError),
    #[error("balancing: {0}")]
    Balance(#[from] BalanceError),
    #[error("separator embedding: {0}")]
    Embed(#[from] EmbedError),
    #[error("every candidate plan failed: {}", .0.join("; "))]
    PlansExhausted(Vec<String>),
}

impl PipelineError {
    pub fn stage(&self) -> &'static str {
        match self {
            PipelineError::Validation(_) => "validate",
            PipelineError::Plan(_) => "plan",
            PipelineError::Separation { .. } => "separate",
            PipelineError::IsoType(_) => "census",
            PipelineError::Design(_) => "designs",
            PipelineError::Assign(_) => "assign",
            PipelineError::Balance(_) => "balance",
            PipelineError::Embed(_) => "embed",
            PipelineError::PlansExhausted(_) => "plan",
        }
    }
}
