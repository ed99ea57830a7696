//! Euclidean optimization functionals on random point sets: exact and
//! heuristic solvers, the Held-Karp relaxation, branch-and-bound
//! instrumentation and Monte-Carlo estimators for their growth constants.

pub mod bnb;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod heldkarp;
pub mod io;
pub mod localmoves;
pub mod oracles;
pub mod solvers;
pub mod structures;

pub use error::{Error, Result};
pub use geometry::{Edge, PointSet};
pub use structures::{Constraints, HFactor, Matching, Pattern, SpanningTree, Tour, TwoFactor};
