//! Gauss-Newton and Newton-Raphson paths on the calibrated MA(1) objective.

use momentopt::model::Weighting;
use momentopt::models::Ma1Model;
use momentopt::numerics::Vector;
use momentopt::optimizers::{run, Method, OptimizerConfig};

fn main() -> momentopt::Result<()> {
    let model = Ma1Model::table1();
    let w = Weighting::identity(1);
    let theta0 = Vector::from_element(1, -0.6);
    let paths: Vec<_> = [Method::Gn, Method::Nr]
        .into_iter()
        .map(|m| run(&model, &w, &theta0, &OptimizerConfig::new(m).gamma(0.1).max_iter(99)))
        .collect::<momentopt::Result<_>>()?;

    println!("{:>3} {:>10} {:>10}", "k", "gn", "nr");
    for k in (0..=8).chain([99]) {
        let at = |i: usize| paths[i].records().get(k).map_or(f64::NAN, |r| r.theta[0]);
        println!("{k:>3} {:>10.4} {:>10.4}", at(0), at(1));
    }
    for (m, p) in ["gn", "nr"].iter().zip(&paths) {
        println!("{m}: {}", p.termination());
    }
    Ok(())
}
