use thiserror::Error;

/// Errors produced while building, encoding, decoding or querying a sketch.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point set is empty")]
    EmptyPointSet,

    #[error("coordinate {coord} of point {point} is not finite")]
    NonFinite { point: usize, coord: usize },

    #[error("points {i} and {j} coincide")]
    DuplicatePoints { i: usize, j: usize },

    #[error("points {i} and {j} are at distance {distance} < 1")]
    BelowUnitDistance { i: usize, j: usize, distance: f64 },

    #[error("vector norm {norm} exceeds the unit ball")]
    NormPrecondition { norm: f64 },

    #[error("children of node {node} do not form a connected proximity graph")]
    DisconnectedChildren { node: usize },

    #[error("ingress order is inconsistent at node {node}")]
    IngressCycle { node: usize },

    #[error("scaled displacement of node {node} has norm {norm} > 1")]
    SurrogateBound { node: usize, norm: f64 },

    #[error("node {node} is missing its {field}")]
    MissingAnnotation { node: usize, field: &'static str },

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("{section} value {value} at node {node} exceeds the encodable bound {bound}")]
    CoordinateOutOfRange {
        section: &'static str,
        node: usize,
        value: i64,
        bound: i64,
    },

    #[error("bad magic bytes")]
    BadMagic,

    #[error("unsupported sketch version {0}")]
    UnsupportedVersion(u8),

    #[error("sketch stream is truncated")]
    Truncated,

    #[error("tree topology has unbalanced parentheses")]
    UnbalancedTopology,

    #[error("malformed sketch: {0}")]
    Malformed(String),

    #[error("node {node} has no leaf surrogate")]
    FineSurrogateUnavailable { node: usize },

    #[error("query needs two distinct points, got {0} twice")]
    SamePoint(usize),

    #[error("point index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("point {point} does not belong to the cluster of node {node}")]
    NotInCluster { point: usize, node: usize },

    #[error("operation requires a Euclidean sketch")]
    NotEuclidean,

    #[error("operation requires the l2 norm")]
    NotL2,

    #[error("triangle inequality fails for ({i}, {j}, {k})")]
    TriangleInequality { i: usize, j: usize, k: usize },

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
