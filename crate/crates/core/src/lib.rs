//! Common secant lines of pairs of twisted cubics in P^3.
//!
//! Two general twisted cubics share exactly ten secant lines. With one
//! cubic fixed as the standard moment curve and the other given as its image
//! under an invertible 4x4 matrix `M`, the secants are the solutions of a
//! square polynomial system in `(t1, t2, s1, s2)` (see [`geometry`]). The
//! crate solves that system by parameter homotopy from a compiled-in base
//! instance ([`tracker`]), classifies the real structure of the solutions
//! ([`classifier`]), certifies it with Smale's alpha theory ([`certifier`]),
//! computes monodromy permutations ([`monodromy`]) and samples the space of
//! real cubics ([`sampler`]).

pub mod certifier;
pub mod classifier;
pub mod data;
pub mod ddouble;
pub mod error;
pub mod exact;
pub mod exec;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod poly;
pub mod monodromy;
pub mod rng;
pub mod sampler;
pub mod tracker;

pub use classifier::{OrbitRecord, SecantClass, TripleCount};
pub use error::{Error, Result};
pub use exec::Execution;
pub use geometry::{ParameterMatrix, SolutionPoint};
pub use tracker::{PathResult, PathStatus, StartSet, TrackerConfig};
