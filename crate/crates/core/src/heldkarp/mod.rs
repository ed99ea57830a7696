mod compose;
mod fractional;
pub mod lp;
mod mincut;
mod relax;
mod sk;

pub use compose::{extend_points, hk_extend_edge_pair, hk_extend_independent, hk_patch};
pub use fractional::{CutCertificate, FractionalSolution};
pub use lp::{lp_min, LpSolution, RowSense, Simplex};
pub use mincut::{hk_feasible, stoer_wagner, support_components, Violation, FEASIBILITY_TOL};
pub use relax::{hk_value, CUT_TOL, HK_MAX_N};
pub use sk::{build_sk, build_sk_fractional, build_sk_with_anchors, default_anchors, SkConstruction, SkKind};
