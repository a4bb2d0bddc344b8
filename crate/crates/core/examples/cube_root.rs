//! The cube-root counterexample: the Jacobian vanishes at the root, so no
//! method converges faster than linearly.

use momentopt::model::Weighting;
use momentopt::models::CubeRootModel;
use momentopt::numerics::Vector;
use momentopt::optimizers::{run, Method, OptimizerConfig};

fn main() -> momentopt::Result<()> {
    let model = CubeRootModel::new(0.0);
    let w = Weighting::identity(1);
    let theta0 = Vector::from_element(1, 1.0);
    for method in [Method::Gd, Method::Gn, Method::Nr] {
        let t = run(&model, &w, &theta0, &OptimizerConfig::new(method).gamma(0.5).max_iter(60))?;
        let th = t.thetas();
        let ratio = th[th.len() - 1][0] / th[th.len() - 2][0];
        println!("{method}: theta_60 = {:.3e}, last ratio {ratio:.4}", th[th.len() - 1][0]);
    }
    Ok(())
}
