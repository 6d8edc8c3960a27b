//! Quasihyperbolic geometry on Euclidean domains, computed on weighted grid
//! graphs: distances and geodesics for the metric with density 1/d(x), Gromov
//! products and hyperbolicity estimates, Busemann functions anchored at a
//! boundary point, boundary quasi-metrics and their chain metrics, conformal
//! deformations of the metric, and discrete p-modulus of curve families.
//!
//! The grid discretization is the ground truth everywhere: a [`graph::MetricGraph`]
//! is built once from an analytic [`geometry::Domain`] oracle, and every other
//! quantity is derived from shortest paths on it. Closed forms exist for a few
//! model domains and are kept around as cross-checks, not as fast paths.

pub mod deform;
pub mod geometry;
pub mod graph;
pub mod gromov;
pub mod modulus;
pub mod qhyp;
pub mod report;
pub mod verify;

/// Errors shared across the crate. Geometry and graph construction fail early
/// and loudly; numeric routines return values and leave judgment to verifiers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown domain kind `{0}`")]
    UnknownKind(String),
    #[error("degenerate domain parameters: {0}")]
    DegenerateParams(String),
    #[error("dimension {0} is unsupported (expected 2 or 3)")]
    BadDim(usize),
    #[error("point dimension {got} does not match domain dimension {want}")]
    DimMismatch { got: usize, want: usize },
    #[error("point is not interior to the domain")]
    NotInterior,
    #[error("vertex budget exceeded: window needs about {got} lattice points, budget is {budget}")]
    BudgetExceeded { got: u64, budget: u64 },
    #[error("graph has no admissible vertices")]
    EmptyVertexSet,
    #[error("endpoints lie in different graph components ({0} vs {1}): disconnected")]
    Disconnected(u32, u32),
    #[error("query point too close to the boundary (d = {d:.3e}, refusal threshold 3h = {limit:.3e})")]
    NearBoundary { d: f64, limit: f64 },
    #[error("anchor point at R = {0} leaves the domain or the window")]
    AnchorOutOfRange(f64),
    #[error("no graph vertex within {0:.3e} of the query point")]
    SnapFailed(f64),
    #[error("an infinity anchor requires an unbounded domain")]
    AnchorNeedsUnbounded,
    #[error("sampler exhausted: wanted {want} points, produced {got}")]
    SampleExhausted { want: usize, got: usize },
    #[error("no interior proxy vertex within {0:.3e} of the boundary point")]
    NoProxy(f64),
    #[error("not a cross-section: removal leaves {0} component(s)")]
    NotCrossSection(usize),
    #[error("continua must be disjoint nonempty vertex sets")]
    BadContinuumPair,
    #[error("empty sample: {0}")]
    EmptySample(String),
}

pub type Result<T> = std::result::Result<T, Error>;
