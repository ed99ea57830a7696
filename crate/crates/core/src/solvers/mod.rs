//! Production solvers for the functionals: spanning trees, matchings,
//! 2-factors, H-factors and tour improvement.

mod blossom;
mod hfactor;
mod matching;
mod mst;
mod mstk;
mod two_factor;
mod two_opt;

pub use blossom::{max_weight_matching, MatchingSolution};
pub use hfactor::{h_factor, H_FACTOR_EXACT_MAX};
pub use matching::min_matching;
pub use mst::{mst, mst_degree_histogram};
pub use mstk::{mst_k, MST_K_EXACT_MAX};
pub use two_factor::{cycle_children, two_factor, two_factor_girth, two_factor_girth_budget, GirthStats, GIRTH_NODE_BUDGET};
pub use two_opt::tour_2opt;
