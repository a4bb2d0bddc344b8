//! Checkable versions of the convergence theory: rank-condition grids,
//! convexity maps, convergence constants and misspecification bounds.

mod constants;
mod convexity;
mod rank;

pub use constants::{
    estimate_constants, local_radius, misspecification_bound, norm_equivalence_check,
    theorem3_conditions, theorem3_feasible, ConvergenceConstants, LocalRadius, MisspecificationBound,
    NormEquivalenceReport, Theorem3Report, DEFAULT_EPSILON, DEFAULT_RHO,
};
pub use convexity::{convexity_map, ConvexityMap};
pub use rank::{
    rank_grid_just_identified, rank_grid_over_identified, RankGridKind, RankGridReport,
    RANK_THRESHOLD,
};

use crate::baselines::uniform_grid;
use crate::error::Result;
use crate::model::Bounds;
use crate::numerics::Vector;

/// Nodes per axis used when none is given: 101 in one dimension, 11 otherwise.
pub fn default_per_axis(dim: usize) -> usize {
    if dim == 1 {
        101
    } else {
        11
    }
}

/// Uniform grid over `bounds` with [`default_per_axis`] nodes per axis.
pub fn default_grid(bounds: &Bounds) -> Result<Vec<Vector>> {
    uniform_grid(bounds, default_per_axis(bounds.dim()))
}
