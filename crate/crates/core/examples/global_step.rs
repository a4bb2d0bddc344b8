//! Local Newton-Raphson against its globalized variant from a poor start.

use momentopt::model::MomentModel;
use momentopt::models::{ma1_moment_model, Ma1Spec, Ma1Weighting};
use momentopt::numerics::Vector;
use momentopt::optimizers::{run, GlobalStepConfig, Method, OptimizerConfig};

fn main() -> momentopt::Result<()> {
    let inst = ma1_moment_model(&Ma1Spec { theta_true: -0.5, n: 200, p: 12, seed: 2 }, Ma1Weighting::Identity)?;
    let theta0 = Vector::from_element(1, 0.95);
    let local = OptimizerConfig::new(Method::Nr).gamma(0.5).max_iter(200);
    let global = local.clone().global_step(GlobalStepConfig { length: 200, seed: 1, lower: None, upper: None });

    for (name, cfg) in [("local", local), ("global", global)] {
        let t = run(&inst.model, &inst.weighting, &theta0, &cfg)?;
        let last = t.last().expect("non-empty trace");
        let jumps = t.records().iter().filter(|r| r.global_accepted).count();
        println!("{name:>6}: theta = {:.6}, Q = {:.3e}, {jumps} candidate jumps, {}", last.theta[0], last.q, t.termination());
    }
    let b = inst.model.bounds();
    println!("box [{}, {}]", b.lower()[0], b.upper()[0]);
    Ok(())
}
