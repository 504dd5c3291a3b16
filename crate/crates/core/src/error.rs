use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("group mismatch: {0}")]
    SpecMismatch(String),

    #[error("invalid group table: {0}")]
    InvalidTable(String),

    #[error("unknown group `{0}`")]
    UnknownGroup(String),

    #[error("invalid element literal: {0}")]
    InvalidElement(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("unknown edge `{0}`")]
    UnknownEdge(String),

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("path endpoints do not compose: word ends at `{end}` but next starts at `{start}`")]
    EndpointMismatch { end: String, start: String },

    #[error("graph is not connected: vertex `{0}` unreachable from base")]
    Disconnected(String),

    #[error("word is not a loop at the base vertex")]
    NotALoop,

    #[error("connection and gauge transform live on different graphs")]
    GraphMismatch,

    #[error("sub-graph edge `{0}` missing from connection graph")]
    MissingEdge(String),

    #[error("element does not centralize the holonomy group")]
    NotInCentralizer,

    #[error("centralizer {0} matches no class of the type poset")]
    TypeNotFound(String),

    #[error("target type {target} is not >= current type {current}")]
    TargetBelowType { target: usize, current: usize },

    #[error("unknown type class `{0}`")]
    UnknownClass(String),

    #[error("enumeration of {needed} configurations exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("point lies {distance:.3e} from the orbit, outside trust radius {radius:.3e}")]
    TrustRegionExceeded { distance: f64, radius: f64 },

    #[error("nearest orbit point is not unique")]
    AmbiguousProjection,

    #[error("orbit projection did not converge after {0} evaluations")]
    NotConverged(usize),

    #[error("{0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
