use momentopt::quasirandom::{map_to_box, random_shift, shift_by, sobol};
use momentopt::numerics::Vector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exact star discrepancy of a 2-d point set, over the corner grid formed by
/// the point coordinates and 1.
fn star_discrepancy_2d(points: &[[f64; 2]]) -> f64 {
    let n = points.len() as f64;
    let mut by_x = points.to_vec();
    by_x.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut ys: Vec<f64> = points.iter().map(|p| p[1]).collect();
    ys.push(1.0);
    ys.sort_by(f64::total_cmp);
    let mut open: Vec<f64> = Vec::with_capacity(points.len());
    let mut worst: f64 = 0.0;
    for i in 0..=by_x.len() {
        let (x, next) = match by_x.get(i) {
            Some(p) => (p[0], Some(p[1])),
            None => (1.0, None),
        };
        for &y in &ys {
            let below = open.partition_point(|v| *v < y) as f64;
            let at_or_below = open.partition_point(|v| *v <= y) as f64
                + next.map_or(0.0, |v| if v <= y { 1.0 } else { 0.0 });
            worst = worst.max(at_or_below / n - x * y).max(x * y - below / n);
        }
        if let Some(v) = next {
            let at = open.partition_point(|w| *w < v);
            open.insert(at, v);
        }
    }
    worst
}

#[test]
fn sobol_beats_uniform_samples_on_star_discrepancy() {
    let ps = sobol(2, 1024).unwrap();
    let pts: Vec<[f64; 2]> = ps.points().iter().map(|p| [p[0], p[1]]).collect();
    let d_sobol = star_discrepancy_2d(&pts);
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let uni: Vec<[f64; 2]> = (0..1024).map(|_| [rng.gen(), rng.gen()]).collect();
        let d = star_discrepancy_2d(&uni);
        assert!(d_sobol < d, "seed {seed}: sobol {d_sobol} vs uniform {d}");
    }
}

#[test]
fn discrepancy_oracle_on_a_single_point() {
    // The closed box [0, 0.5]^2 holds the single point but has volume 1/4.
    let d = star_discrepancy_2d(&[[0.5, 0.5]]);
    assert!((d - 0.75).abs() < 1e-15, "{d}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn deterministic(dim in 1usize..6, n in 1usize..200, seed in any::<u64>()) {
        let a = random_shift(&sobol(dim, n).unwrap(), seed);
        let b = random_shift(&sobol(dim, n).unwrap(), seed);
        prop_assert_eq!(a.points(), b.points());
    }

    #[test]
    fn points_in_unit_cube(dim in 1usize..8, n in 1usize..300, seed in any::<u64>()) {
        let ps = random_shift(&sobol(dim, n).unwrap(), seed);
        prop_assert!(ps.points().iter().flatten().all(|x| (0.0..1.0).contains(x)));
    }

    #[test]
    fn shift_preserves_mod_one_differences(dim in 1usize..4, n in 2usize..64, s1 in any::<u64>(), s2 in any::<u64>()) {
        let base = sobol(dim, n).unwrap();
        let a = random_shift(&base, s1);
        let b = random_shift(&base, s2);
        let diff = |p: &[f64], q: &[f64]| -> Vec<f64> {
            p.iter().zip(q).map(|(x, y)| (x - y).rem_euclid(1.0)).collect()
        };
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(diff(&a.points()[i], &a.points()[j]), diff(&b.points()[i], &b.points()[j]));
                prop_assert_eq!(diff(&a.points()[i], &a.points()[j]), diff(&base.points()[i], &base.points()[j]));
            }
        }
    }

    #[test]
    fn zero_shift_is_identity(dim in 1usize..5, n in 1usize..100) {
        let base = sobol(dim, n).unwrap();
        let shifted = shift_by(&base, &vec![0.0; dim]).unwrap();
        prop_assert_eq!(shifted.points(), base.points());
    }

    #[test]
    fn mapped_points_stay_in_box(
        n in 1usize..100,
        seed in any::<u64>(),
        lo in prop::collection::vec(-100.0f64..100.0, 3),
        width in prop::collection::vec(1e-6f64..50.0, 3),
    ) {
        let ps = random_shift(&sobol(3, n).unwrap(), seed);
        let lower = Vector::from_vec(lo.clone());
        let upper = Vector::from_iterator(3, lo.iter().zip(&width).map(|(l, w)| l + w));
        for p in map_to_box(&ps, &lower, &upper).unwrap() {
            for j in 0..3 {
                prop_assert!(lower[j] <= p[j] && p[j] <= upper[j]);
            }
        }
    }
}
