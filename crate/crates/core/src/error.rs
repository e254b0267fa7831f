use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    InvalidTopology(&'static str),
    #[error("torus side length {0} is below 3; wraparound edges would not form a simple graph")]
    TorusTooSmall(usize),
    #[error("graph is not simple: edge {0}-{1} is a loop or duplicate")]
    NotSimple(usize, usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("interior vertex set is disconnected")]
    InteriorDisconnected,
    #[error("graph has {0} edges; at least 2 are required")]
    TooFewEdges(usize),
    #[error("interior vertex set is empty")]
    EmptyInterior,
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("coupling at edge {0} is not finite")]
    NonFiniteCoupling(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("perturbation parameter p = {0} must lie strictly inside (0, 1)")]
    InvalidPerturbation(f64),
    #[error("invalid boundary condition: {0}")]
    InvalidBoundaryCondition(&'static str),
    #[error("{free_spins} free spins exceed the exact solver cap of {cap}")]
    TooLarge { free_spins: usize, cap: usize },
    #[error("invalid annealing schedule: {0}")]
    InvalidSchedule(&'static str),
    #[error("annealing needs at least one restart")]
    InvalidRestarts,
    #[error("pair {0}-{1} is not an edge of the graph")]
    ConstraintNotEdge(usize, usize),
    #[error("pair constraint contradicts the fixed boundary spins")]
    InfeasibleConstraint,
    #[error("region contains boundary vertex {0}")]
    RegionTouchesBoundary(usize),
    #[error("interface energy formulas disagree: flip-and-evaluate {flip}, boundary sum {boundary}")]
    InternalMismatch { flip: f64, boundary: f64 },
    #[error("operation requires the Gaussian rotation perturbation")]
    WrongKind,
    #[error("operation requires a graph with a nonempty boundary set")]
    NotOpenCube,
}
