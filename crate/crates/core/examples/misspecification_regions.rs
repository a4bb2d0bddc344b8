//! Grid estimates of the convergence constants and the feasible (gamma, phi) region.

use momentopt::baselines::uniform_grid;
use momentopt::diagnostics::{
    estimate_constants, local_radius, misspecification_bound, theorem3_conditions, ConvergenceConstants,
    DEFAULT_EPSILON, DEFAULT_RHO,
};
use momentopt::model::{Bounds, Weighting};
use momentopt::models::GaussianModel;

fn main() -> momentopt::Result<()> {
    let model = GaussianModel::population(0.0, 1.0)?;
    let grid = uniform_grid(&Bounds::from_slices(&[-0.5, 0.75], &[0.5, 1.25])?, 9)?;
    let k = estimate_constants(&model, &Weighting::identity(3), &grid)?;
    println!("sigma in [{:.4}, {:.4}], L = {:.4}, L_Q = {:.4}", k.sigma_lower, k.sigma_upper, k.lipschitz, k.lipschitz_grad);
    let b = misspecification_bound(&k)?;
    println!("misspecification bound: local {:.4}, global {:.4}", b.local, b.global);
    let r = local_radius(&k, 1.0, 0.5, 0.0, f64::INFINITY)?;
    println!("local radius {:.4}", r.r);

    let unit = ConvergenceConstants::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0)?;
    println!("gamma \\ phi: A = all conditions hold, B = pair condition fails, C = all fail");
    for i in 0..6 {
        let gamma = 0.05 + 0.05 * i as f64;
        let row: String = (0..21)
            .map(|j| {
                let rep = theorem3_conditions(gamma, 0.05 * j as f64, &unit, DEFAULT_RHO, DEFAULT_EPSILON)?;
                Ok(match (rep.feasible, rep.phi_condition) {
                    (true, _) => 'A',
                    (false, true) => 'B',
                    (false, false) => 'C',
                })
            })
            .collect::<momentopt::Result<_>>()?;
        println!("{gamma:.2}  {row}");
    }
    Ok(())
}
