//! Derivative-free baselines on the MA(1) objective.

use momentopt::baselines::{
    gmm_multi_start, grid_search, nelder_mead, simulated_annealing, uniform_grid, AnnealingSchedule,
    NelderMeadConfig, Simplex,
};
use momentopt::model::{objective_value, MomentModel};
use momentopt::models::{ma1_moment_model, Ma1Spec, Ma1Weighting};
use momentopt::numerics::Vector;
use momentopt::optimizers::{Method, OptimizerConfig};
use momentopt::quasirandom::box_candidates;

fn main() -> momentopt::Result<()> {
    let inst = ma1_moment_model(&Ma1Spec { theta_true: -0.5, n: 200, p: 12, seed: 2 }, Ma1Weighting::Identity)?;
    let (model, w) = (&inst.model, &inst.weighting);
    let q = |t: &Vector| objective_value(model, w, t);
    // Nelder-Mead stops on failed evaluations, so probes outside the box get a penalty.
    let q_boxed = |t: &Vector| if model.bounds().contains(t) { q(t) } else { Ok(1e6) };
    let start = Vector::from_element(1, 0.5);

    let nm = nelder_mead(q_boxed, Simplex::around(&q_boxed, &start)?, &NelderMeadConfig::default())?;
    println!("nelder-mead: {:.6} after {} iterations", nm.best[0], nm.iterations);

    let grid = grid_search(q, &uniform_grid(model.bounds(), 199)?)?;
    println!("grid:        {:.6}", grid.point[0]);

    let sa = simulated_annealing(q, &start, &AnnealingSchedule::new(0.01, 2000, 7))?;
    println!("annealing:   {:.6} ({} rejections)", sa.best[0], sa.rejections);

    let starts = box_candidates(model.bounds(), 20, 3)?;
    let ms = gmm_multi_start(model, w, &starts, &OptimizerConfig::new(Method::Gn).gamma(0.5).max_iter(200))?;
    println!(
        "multi-start: {:.6} (mean {:.6}, std {:.2e}, {} crashes)",
        ms.best().theta[0],
        ms.mean()[0],
        ms.std()[0],
        ms.crashes
    );
    Ok(())
}
