//! Rank-condition grids for a simulated MA(1) sample under two weightings.

use momentopt::baselines::uniform_grid;
use momentopt::diagnostics::rank_grid_over_identified;
use momentopt::models::{ma1_moment_model, Ma1Spec, Ma1Weighting};

fn main() -> momentopt::Result<()> {
    let spec = Ma1Spec { theta_true: -0.5, n: 200, p: 12, seed: 2 };
    for weighting in [Ma1Weighting::Identity, Ma1Weighting::Optimal] {
        let inst = ma1_moment_model(&spec, weighting)?;
        let grid = uniform_grid(momentopt::model::MomentModel::bounds(&inst.model), 101)?;
        let r = rank_grid_over_identified(&inst.model, &inst.weighting, &grid)?;
        let (a, b) = r.argmin_nodes();
        println!(
            "{weighting:?}: {} (min {:.3e} at ({:.3}, {:.3}), sign change {})",
            r.verdict(),
            r.min_value,
            a[0],
            b[0],
            r.sign_change
        );
    }
    Ok(())
}
