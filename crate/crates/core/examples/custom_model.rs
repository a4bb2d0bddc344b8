//! Plugging a user-defined moment model into the optimizers and diagnostics.

use momentopt::baselines::uniform_grid;
use momentopt::diagnostics::rank_grid_over_identified;
use momentopt::model::{Bounds, MomentModel, Weighting};
use momentopt::numerics::{Matrix, Vector};
use momentopt::optimizers::{run, Method, OptimizerConfig};

/// Exponential rate `lambda` matched on the first two raw moments.
struct Exponential {
    m1: f64,
    m2: f64,
    bounds: Bounds,
}

impl MomentModel for Exponential {
    fn param_dim(&self) -> usize {
        1
    }

    fn moment_dim(&self) -> usize {
        2
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn moments(&self, theta: &Vector) -> momentopt::Result<Vector> {
        let l = theta[0];
        Ok(Vector::from_vec(vec![1.0 / l - self.m1, 2.0 / (l * l) - self.m2]))
    }

    fn analytic_jacobian(&self, theta: &Vector) -> Option<momentopt::Result<Matrix>> {
        let l = theta[0];
        Some(Ok(Matrix::from_column_slice(2, 1, &[-1.0 / (l * l), -4.0 / (l * l * l)])))
    }
}

fn main() -> momentopt::Result<()> {
    let model = Exponential { m1: 0.52, m2: 0.49, bounds: Bounds::from_slices(&[0.2], &[10.0])? };
    let w = Weighting::identity(2);
    for method in [Method::Gn, Method::Lm] {
        let cfg = OptimizerConfig { lm_lambda: 0.1, ..OptimizerConfig::new(method).gamma(0.5).max_iter(200) };
        let t = run(&model, &w, &Vector::from_element(1, 1.0), &cfg)?;
        println!("{method}: lambda = {:.6} ({})", t.final_theta().expect("non-empty")[0], t.termination());
    }
    let r = rank_grid_over_identified(&model, &w, &uniform_grid(model.bounds(), 50)?)?;
    println!("rank condition {} (min {:.3e})", r.verdict(), r.min_value);
    Ok(())
}
