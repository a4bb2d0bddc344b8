use momentopt::baselines::{
    grid_search, gmm_multi_start, nelder_mead, simulated_annealing, uniform_grid,
    AnnealingSchedule, NelderMeadConfig, Simplex,
};
use momentopt::model::{objective_value, Bounds, Weighting};
use momentopt::models::{GaussianModel, Ma1Model};
use momentopt::numerics::Vector;
use momentopt::optimizers::{Method, OptimizerConfig};
use momentopt::Result;
use proptest::prelude::*;

fn rosenbrock(t: &Vector) -> Result<f64> {
    Ok((1.0 - t[0]).powi(2) + 100.0 * (t[1] - t[0] * t[0]).powi(2))
}

fn gaussian_q(t: &Vector) -> Result<f64> {
    objective_value(&GaussianModel::population(0.5, 2.0)?, &Weighting::identity(3), t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn nm_best_value_never_rises(x in -2.0f64..2.0, y in -1.0f64..3.0, d in 1usize..5) {
        let f = |t: &Vector| -> Result<f64> { Ok(t.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * (v - 0.3).powi(2)).sum::<f64>() + rosenbrock(&Vector::from_vec(vec![t[0], t.get(1).copied().unwrap_or(1.0)]))?) };
        let start = Vector::from_fn(d, |i, _| if i % 2 == 0 { x } else { y });
        let cfg = NelderMeadConfig { max_iter: 300, ..NelderMeadConfig::default() };
        let res = nelder_mead(f, Simplex::around(&f, &start)?, &cfg)?;
        prop_assert_eq!(res.simplex.vertices().len(), d + 1);
        prop_assert_eq!(res.simplex.values().len(), d + 1);
        for p in res.trace.windows(2) {
            prop_assert!(p[1].best_value <= p[0].best_value);
        }
        prop_assert_eq!(res.value, f(&res.best)?);
    }

    #[test]
    fn grid_result_is_no_worse_than_any_node(lo in -3.0f64..-0.5, hi in 0.5f64..3.0, n in 2usize..12) {
        let bounds = Bounds::from_slices(&[lo, lo], &[hi, hi])?;
        let grid = uniform_grid(&bounds, n)?;
        let res = grid_search(rosenbrock, &grid)?;
        prop_assert_eq!(res.evaluated, n * n);
        for node in &grid {
            prop_assert!(res.value <= rosenbrock(node)?);
        }
        prop_assert_eq!(&res.point, &grid[res.index]);
    }

    #[test]
    fn annealing_chain_sits_at_last_accepted_point(seed in 0u64..1000, t1 in 0.01f64..10.0) {
        let start = Vector::from_vec(vec![1.0, 1.5]);
        let res = simulated_annealing(gaussian_q, &start, &AnnealingSchedule::new(t1, 200, seed))?;
        let last = res.trace.iter().rev().find(|r| r.accepted).map(|r| Vector::from_vec(r.proposal.clone())).unwrap_or(start.clone());
        prop_assert_eq!(&res.current, &last);
        let mut current_q = gaussian_q(&start)?;
        for r in &res.trace {
            if r.accepted {
                current_q = r.proposal_value.unwrap();
            }
            prop_assert_eq!(r.current_value, current_q);
        }
        prop_assert_eq!(res.rejections, res.trace.iter().filter(|r| !r.accepted).count());
        let visited_min = res.trace.iter().filter(|r| r.accepted).map(|r| r.current_value).fold(gaussian_q(&start)?, f64::min);
        prop_assert_eq!(res.value, visited_min);
    }
}

#[test]
fn multi_start_is_deterministic() {
    let model = Ma1Model::table1();
    let w = Weighting::identity(1);
    let starts: Vec<Vector> = (0..16).map(|i| Vector::from_element(1, -0.9 + 0.12 * i as f64)).collect();
    for method in [Method::Gn, Method::Nr, Method::Bfgs] {
        let cfg = OptimizerConfig::new(method).gamma(0.5).max_iter(200);
        let a = gmm_multi_start(&model, &w, &starts, &cfg).unwrap();
        let b = gmm_multi_start(&model, &w, &starts, &cfg).unwrap();
        assert_eq!(a, b, "{method}");
        assert_eq!(a.results.len(), starts.len());
        for (r, s) in a.results.iter().zip(&starts) {
            assert_eq!(&r.start, s);
        }
    }
}
