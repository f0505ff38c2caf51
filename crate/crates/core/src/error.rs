use thiserror::Error;

/// Errors raised by mesh validation, assembly, factorization and eigensolves.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex index {index} out of range in {context} (mesh has {len} vertices)")]
    IndexOutOfRange {
        context: String,
        index: usize,
        len: usize,
    },

    #[error("triangle {triangle} is degenerate: {reason}")]
    DegenerateTriangle { triangle: usize, reason: String },

    #[error("edge ({a}, {b}) belongs to {count} triangles (expected 1 or 2)")]
    EdgeIncidence { a: usize, b: usize, count: usize },

    #[error("edge ({a}, {b}) is traversed in the same direction by two triangles")]
    InconsistentOrientation { a: usize, b: usize },

    #[error("vertex {vertex} does not have a manifold link: {reason}")]
    NonManifoldVertex { vertex: usize, reason: String },

    #[error("boundary edges do not close into simple loops at vertex {vertex}")]
    BoundaryNotClosed { vertex: usize },

    #[error("metric tensor of triangle {triangle} is not positive definite (det {det}, trace {trace})")]
    MetricNotPositive {
        triangle: usize,
        det: f64,
        trace: f64,
    },

    #[error("boundary weight must be positive, found {value} at vertex {vertex}")]
    NonPositiveWeight { vertex: usize, value: f64 },

    #[error("identified vertices {a} and {b} carry different boundary weights")]
    WeightMismatch { a: usize, b: usize },

    #[error("expected {expected} values for {what}, found {found}")]
    SizeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mesh has no boundary")]
    ClosedMesh,

    #[error("mesh has a boundary but a closed mesh is required")]
    NotClosed,

    #[error("mesh is not connected ({components} components)")]
    Disconnected { components: usize },

    #[error("factorization failed: pivot {pivot} has value {value}")]
    Factorization { pivot: usize, value: f64 },

    #[error("requested {requested} eigenpairs but only {available} boundary degrees of freedom exist")]
    TooManyEigenpairs { requested: usize, available: usize },

    #[error("unsupported mesh file version {0}")]
    UnsupportedVersion(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
