use momentopt::model::MomentModel;
use momentopt::models::{CubeRootModel, GaussianModel, Ma1Model};
use momentopt::numerics::{
    finite_diff_jacobian, max_singular_value, min_singular_value, solve_spd, sym_eigenvalues, Matrix,
    StepRule, Vector,
};
use proptest::prelude::*;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
fn jacobi_eigenvalues(s: &Matrix) -> Vec<f64> {
    let n = s.nrows();
    let mut a = s.clone();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    d.sort_by(f64::total_cmp);
    d
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-5.0f64..5.0, rows * cols).prop_map(move |v| Matrix::from_row_slice(rows, cols, &v))
}

fn any_matrix() -> impl Strategy<Value = Matrix> {
    (1usize..6, 1usize..6).prop_flat_map(|(r, c)| matrix(r, c))
}

fn symmetric() -> impl Strategy<Value = Matrix> {
    (1usize..6).prop_flat_map(|n| matrix(n, n).prop_map(|m| (&m + m.transpose()) * 0.5))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn sigma_min_is_transpose_invariant(m in any_matrix()) {
        let a = min_singular_value(&m).unwrap();
        let b = min_singular_value(&m.transpose()).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * max_singular_value(&m).unwrap().max(1.0));
    }

    #[test]
    fn sigma_min_matches_jacobi_oracle(m in any_matrix()) {
        let (r, c) = m.shape();
        let gram = if r >= c { m.transpose() * &m } else { &m * m.transpose() };
        let oracle = jacobi_eigenvalues(&gram)[0].max(0.0).sqrt();
        let got = min_singular_value(&m).unwrap();
        let scale = max_singular_value(&m).unwrap().max(1.0);
        prop_assert!((got - oracle).abs() <= 1e-6 * scale, "{} vs {}", got, oracle);
    }

    #[test]
    fn eigenvalues_match_jacobi_oracle(s in symmetric()) {
        let mut got: Vec<f64> = sym_eigenvalues(&s).unwrap().iter().copied().collect();
        got.reverse();
        let oracle = jacobi_eigenvalues(&s);
        for (g, o) in got.iter().zip(&oracle) {
            prop_assert!((g - o).abs() <= 1e-9 * s.norm().max(1.0));
        }
    }

    #[test]
    fn eigenvalue_sum_and_product(n in 2usize..4, v in prop::collection::vec(-5.0f64..5.0, 9)) {
        let m = Matrix::from_fn(n, n, |i, j| v[i * 3 + j]);
        let s = (&m + m.transpose()) * 0.5;
        let e = sym_eigenvalues(&s).unwrap();
        let scale = s.norm().max(1.0);
        prop_assert!((e.sum() - s.trace()).abs() <= 1e-9 * scale);
        prop_assert!((e.product() - s.determinant()).abs() <= 1e-8 * scale.powi(n as i32));
    }

    #[test]
    fn spd_solve_residual(n in 1usize..6, v in prop::collection::vec(-2.0f64..2.0, 36), b in prop::collection::vec(-5.0f64..5.0, 6)) {
        let mut l = Matrix::from_fn(n, n, |i, j| if j <= i { v[i * 6 + j] } else { 0.0 });
        for i in 0..n {
            l[(i, i)] = l[(i, i)].abs() + 0.5;
        }
        let a = &l * l.transpose();
        let rhs = Vector::from_column_slice(&b[..n]);
        let x = solve_spd(&a, &rhs).unwrap();
        prop_assert!((&a * &x - &rhs).norm() <= 1e-8 * rhs.norm().max(1.0));
    }
}

fn fd_agrees(model: &dyn MomentModel, points: &[Vector]) {
    for t in points {
        let analytic = model.jacobian(t).unwrap();
        let fd = finite_diff_jacobian(|x| model.moments(x), t, StepRule::first_order()).unwrap();
        let gap = (&analytic - &fd).abs().max();
        assert!(gap <= 1e-6, "gap {gap:e} at {:?}", t.as_slice());
    }
}

fn line(lo: f64, hi: f64) -> Vec<Vector> {
    (0..21).map(|i| Vector::from_element(1, lo + (hi - lo) * i as f64 / 20.0)).collect()
}

#[test]
fn finite_differences_match_model_jacobians_on_grid() {
    fd_agrees(&CubeRootModel::new(0.5), &line(-1.5, 2.5));
    fd_agrees(&Ma1Model::table1(), &line(-0.95, 0.95));
    let gauss: Vec<Vector> = line(0.1, 3.0).iter().map(|s| Vector::from_vec(vec![0.5 - s[0] / 3.0, s[0]])).collect();
    fd_agrees(&GaussianModel::population(0.2, 1.5).unwrap(), &gauss);
}
