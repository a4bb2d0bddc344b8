//! Curvature of the Gaussian moment objective: convex at the truth, saddle nearby.

use momentopt::diagnostics::convexity_map;
use momentopt::model::{full_hessian, HessianConvention, Weighting};
use momentopt::models::GaussianModel;
use momentopt::numerics::{sym_eigenvalues, Vector};

fn main() -> momentopt::Result<()> {
    let model = GaussianModel::population(0.0, 1.0)?;
    let w = Weighting::identity(3);
    for theta in [[0.0, 1.0], [0.0, 0.5]] {
        let h = full_hessian(&model, &w, &Vector::from_column_slice(&theta))? * HessianConvention::Double.factor();
        let eig = sym_eigenvalues(&h)?;
        println!("theta = {theta:?}: eigenvalues {:.6} {:.6}", eig[0], eig[1]);
    }

    let grid: Vec<Vector> = (0..=20)
        .map(|i| Vector::from_vec(vec![0.0, 0.25 + 0.1 * i as f64]))
        .collect();
    let map = convexity_map(&model, &w, &grid, HessianConvention::Double)?;
    for (t, l) in grid.iter().zip(&map.lambda_min) {
        println!("sigma2 = {:.2}  lambda_min = {l:>10.4}", t[1]);
    }
    println!("non-convex somewhere: {}", map.is_non_convex());
    Ok(())
}
