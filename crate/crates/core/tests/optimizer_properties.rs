use momentopt::model::{objective, Weighting};
use momentopt::models::{
    ma1_moment_model, GaussianModel, LinearModel, Ma1Model, Ma1Spec, Ma1Weighting, Rescaled,
};
use momentopt::numerics::{Matrix, Vector};
use momentopt::optimizers::{run, GlobalStepConfig, Method, OptimizerConfig};
use proptest::prelude::*;

fn v1(x: f64) -> Vector {
    Vector::from_element(1, x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn linear_gn_with_unit_rate_is_one_step(
        a in prop::collection::vec(-2.0f64..2.0, 9),
        b in prop::collection::vec(-3.0f64..3.0, 3),
        t0 in prop::collection::vec(-5.0f64..5.0, 3),
    ) {
        let mut a = Matrix::from_row_slice(3, 3, &a);
        a += Matrix::identity(3, 3) * 5.0;
        let model = LinearModel::new(a, Vector::from_vec(b)).unwrap();
        let w = Weighting::identity(3);
        let trace = run(&model, &w, &Vector::from_vec(t0), &OptimizerConfig::new(Method::Gn).gamma(1.0).max_iter(1)).unwrap();
        prop_assert_eq!(trace.iterations(), 1);
        let end = trace.final_theta().unwrap();
        prop_assert!(objective(&model, &w, end).unwrap().weighted_norm <= 1e-10);
    }

    #[test]
    fn gn_tail_rate_is_at_most_one_minus_half_gamma(t0 in -0.9f64..0.9, gamma in 0.1f64..=1.0) {
        prop_assume!((t0 + 0.339).abs() > 1e-3);
        let trace = run(&Ma1Model::table1(), &Weighting::identity(1), &v1(t0), &OptimizerConfig::new(Method::Gn).gamma(gamma).max_iter(2000)).unwrap();
        let dist: Vec<f64> = trace.thetas().iter().map(|t| (t[0] + 0.339).abs()).take_while(|d| *d > 1e-11).collect();
        prop_assume!(dist.len() > 11);
        let ratios: Vec<f64> = dist.windows(2).map(|p| p[1] / p[0]).collect();
        for r in &ratios[ratios.len() - 10..] {
            prop_assert!(*r <= 1.0 - gamma / 2.0, "ratio {}", r);
        }
    }
}

#[test]
fn gn_objective_strictly_decreases_from_twenty_starts() {
    let model = Ma1Model::table1();
    let w = Weighting::identity(1);
    for i in 0..20 {
        let t0 = -0.9 + 1.8 * i as f64 / 19.0;
        let trace = run(&model, &w, &v1(t0), &OptimizerConfig::new(Method::Gn).gamma(0.1).max_iter(1000)).unwrap();
        let q = trace.objective_values();
        for (k, p) in q.windows(2).enumerate() {
            assert!(p[1] < p[0], "start {t0}: Q rises at k = {}", k + 1);
        }
        assert!(trace.termination().is_converged(), "start {t0}: {}", trace.termination());
    }
}

fn assert_maps_back<F: Fn(f64) -> Box<dyn momentopt::model::MomentModel>>(build: F, theta0: &Vector, w: &Weighting) {
    let cfg = OptimizerConfig::new(Method::Gn).gamma(0.3).max_iter(40);
    let base = run(&build(1.0), w, theta0, &cfg).unwrap();
    for c in [0.5, 2.0] {
        let re = run(&build(c), w, &(theta0 / c), &cfg).unwrap();
        assert_eq!(re.iterations(), base.iterations());
        for (a, b) in base.records().iter().zip(re.records()) {
            let back = &b.theta * c;
            assert!((&a.theta - back).abs().max() <= 1e-9, "c = {c}, k = {}", a.k);
        }
    }
}

#[test]
fn gn_is_invariant_to_linear_rescaling() {
    assert_maps_back(|c| Box::new(Rescaled::new(Ma1Model::table1(), c).unwrap()), &v1(0.8), &Weighting::identity(1));
    assert_maps_back(
        |c| Box::new(Rescaled::new(GaussianModel::population(0.0, 1.0).unwrap(), c).unwrap()),
        &Vector::from_vec(vec![1.5, 0.4]),
        &Weighting::identity(3),
    );
    let inst = ma1_moment_model(&Ma1Spec { theta_true: -0.5, n: 200, p: 12, seed: 2 }, Ma1Weighting::Optimal).unwrap();
    let w = inst.weighting.clone();
    assert_maps_back(move |c| Box::new(Rescaled::new(inst.model.clone(), c).unwrap()), &v1(0.6), &w);
}

#[test]
fn identical_configs_give_identical_traces() {
    let inst = ma1_moment_model(&Ma1Spec { theta_true: -0.5, n: 200, p: 12, seed: 5 }, Ma1Weighting::Identity).unwrap();
    for method in Method::ALL {
        let cfg = OptimizerConfig::new(method).gamma(0.2).max_iter(60).global_step(GlobalStepConfig {
            length: 60,
            seed: 9,
            lower: None,
            upper: None,
        });
        let a = run(&inst.model, &inst.weighting, &v1(0.9), &cfg).unwrap();
        let b = run(&inst.model, &inst.weighting, &v1(0.9), &cfg).unwrap();
        assert_eq!(a, b, "{method}");
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        a.write_csv(&mut ca).unwrap();
        b.write_csv(&mut cb).unwrap();
        assert_eq!(ca, cb);
    }
}
