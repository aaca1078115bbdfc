use thiserror::Error;

use crate::classifier::TripleCount;
use crate::tracker::PathResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not invertible: |det| = {det:.3e} below threshold {threshold:.3e}")]
    SingularMatrix { det: f64, threshold: f64 },

    #[error("degenerate secant: |t1 - t2| = {separation:.3e}")]
    DegenerateSecant { separation: f64 },

    #[error("zero vector has no projective point")]
    ZeroVector,

    #[error("newton refinement did not reach {tol:.1e} in {iters} iterations (residual {residual:.3e})")]
    NoConvergence { tol: f64, iters: usize, residual: f64 },

    #[error("jacobian is numerically singular")]
    SingularJacobian,

    #[error("start set bootstrap failed: {0}")]
    BootstrapFailure(String),

    #[error("target is non-generic: {converged} of 40 paths converged, {orbits} orbits")]
    NonGenericTarget {
        converged: usize,
        orbits: usize,
        paths: Box<Vec<PathResult>>,
    },

    #[error("determinant along edge has only {roots} roots")]
    DegenerateCubic { roots: usize },

    #[error("orbit grouping failed: {0}")]
    OrbitMismatch(String),

    #[error("ambiguous reality for coordinate {coordinate}: |Im| = {imag:.3e}")]
    AmbiguousReality { coordinate: usize, imag: f64 },

    #[error("t-pair and s-pair disagree on reality: {0}")]
    InconsistentOrbit(String),

    #[error("odd number of nonreal secants ({nonreal})")]
    ParityViolation { nonreal: usize },

    #[error("tuple {0} is not admissible")]
    InadmissibleTuple(TripleCount),

    #[error("certification incomplete: undetermined orbits {orbits:?}")]
    CertificationIncomplete { orbits: Vec<usize> },

    #[error("monodromy loop failed on orbit {orbit}, edge {edge}: {status}")]
    LoopFailure {
        orbit: usize,
        edge: usize,
        status: String,
    },

    #[error("endpoint of orbit {orbit} matches no base orbit unambiguously (ratio {ratio:.2})")]
    AmbiguousMatching { orbit: usize, ratio: f64 },

    #[error("sampling exhausted after {0} redraws")]
    SamplingExhausted(usize),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("parse error in {field}: {message}")]
    Parse { field: String, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }
}
