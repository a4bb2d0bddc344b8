//! Moment-condition models, weighting matrices and the quadratic objective
//! `Q(theta) = 1/2 g(theta)' W g(theta)` with its derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    finite_diff_jacobian, sym_eigenvalues, symmetrize, Matrix, StepRule, Vector,
};

/// Closed box `[lower, upper]` for the parameters. Infinite ends are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    lower: Vector,
    upper: Vector,
}

impl Bounds {
    pub fn new(lower: Vector, upper: Vector) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::invalid("bounds must be non-empty and of equal length"));
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| !(l < u)) {
            return Err(Error::invalid(format!(
                "inverted or empty bounds: lower {:?}, upper {:?}",
                lower.as_slice(),
                upper.as_slice()
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn from_slices(lower: &[f64], upper: &[f64]) -> Result<Self> {
        Self::new(Vector::from_column_slice(lower), Vector::from_column_slice(upper))
    }

    pub fn unbounded(dim: usize) -> Self {
        Self {
            lower: Vector::from_element(dim, f64::NEG_INFINITY),
            upper: Vector::from_element(dim, f64::INFINITY),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &Vector {
        &self.lower
    }

    pub fn upper(&self) -> &Vector {
        &self.upper
    }

    pub fn is_finite(&self) -> bool {
        self.lower.iter().chain(self.upper.iter()).all(|x| x.is_finite())
    }

    pub fn contains(&self, theta: &Vector) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lower.iter().zip(self.upper.iter()))
                .all(|(t, (l, u))| *l <= *t && *t <= *u)
    }

    pub fn project(&self, theta: &Vector) -> Vector {
        Vector::from_iterator(
            theta.len(),
            theta
                .iter()
                .zip(self.lower.iter().zip(self.upper.iter()))
                .map(|(t, (l, u))| t.clamp(*l, *u)),
        )
    }
}

/// A sample-moment map `theta -> g(theta)` with optional analytic derivatives.
///
/// Evaluation must be a pure function of `theta`; simulation-based models
/// freeze their randomness at construction.
pub trait MomentModel: Send + Sync {
    fn param_dim(&self) -> usize;

    fn moment_dim(&self) -> usize;

    fn bounds(&self) -> &Bounds;

    fn moments(&self, theta: &Vector) -> Result<Vector>;

    /// Analytic `m x d` Jacobian, when the model has one.
    fn analytic_jacobian(&self, _theta: &Vector) -> Option<Result<Matrix>> {
        None
    }

    /// Analytic `d x d` Hessians of each moment, when available.
    fn analytic_moment_hessians(&self, _theta: &Vector) -> Option<Result<Vec<Matrix>>> {
        None
    }

    /// Jacobian, analytic when available and central differences otherwise.
    fn jacobian(&self, theta: &Vector) -> Result<Matrix> {
        match self.analytic_jacobian(theta) {
            Some(j) => j,
            None => finite_diff_jacobian(|t| self.moments(t), theta, StepRule::first_order()),
        }
    }
}

impl<M: MomentModel + ?Sized> MomentModel for &M {
    fn param_dim(&self) -> usize {
        (**self).param_dim()
    }
    fn moment_dim(&self) -> usize {
        (**self).moment_dim()
    }
    fn bounds(&self) -> &Bounds {
        (**self).bounds()
    }
    fn moments(&self, theta: &Vector) -> Result<Vector> {
        (**self).moments(theta)
    }
    fn analytic_jacobian(&self, theta: &Vector) -> Option<Result<Matrix>> {
        (**self).analytic_jacobian(theta)
    }
    fn analytic_moment_hessians(&self, theta: &Vector) -> Option<Result<Vec<Matrix>>> {
        (**self).analytic_moment_hessians(theta)
    }
    fn jacobian(&self, theta: &Vector) -> Result<Matrix> {
        (**self).jacobian(theta)
    }
}

impl<M: MomentModel + ?Sized> MomentModel for Box<M> {
    fn param_dim(&self) -> usize {
        (**self).param_dim()
    }
    fn moment_dim(&self) -> usize {
        (**self).moment_dim()
    }
    fn bounds(&self) -> &Bounds {
        (**self).bounds()
    }
    fn moments(&self, theta: &Vector) -> Result<Vector> {
        (**self).moments(theta)
    }
    fn analytic_jacobian(&self, theta: &Vector) -> Option<Result<Matrix>> {
        (**self).analytic_jacobian(theta)
    }
    fn analytic_moment_hessians(&self, theta: &Vector) -> Option<Result<Vec<Matrix>>> {
        (**self).analytic_moment_hessians(theta)
    }
    fn jacobian(&self, theta: &Vector) -> Result<Matrix> {
        (**self).jacobian(theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightingKind {
    Identity,
    Fixed,
    InverseCovariance,
}

/// Symmetric positive-definite weighting matrix `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct Weighting {
    kind: WeightingKind,
    matrix: Matrix,
    lambda_min: f64,
    lambda_max: f64,
}

impl Weighting {
    pub fn identity(m: usize) -> Self {
        Self {
            kind: WeightingKind::Identity,
            matrix: Matrix::identity(m, m),
            lambda_min: 1.0,
            lambda_max: 1.0,
        }
    }

    pub fn fixed(w: Matrix) -> Result<Self> {
        let w = symmetrize(&w)?;
        let (lambda_min, lambda_max) = positive_spectrum(&w, "weighting matrix")?;
        Ok(Self {
            kind: WeightingKind::Fixed,
            matrix: w,
            lambda_min,
            lambda_max,
        })
    }

    /// Optimal weighting `W = V^{-1}` from a moment covariance `V`.
    pub fn inverse_covariance(v: &Matrix) -> Result<Self> {
        let v = symmetrize(v)?;
        positive_spectrum(&v, "covariance matrix")?;
        let inv = v
            .cholesky()
            .ok_or_else(|| Error::invalid("covariance matrix is not positive definite"))?
            .inverse();
        let w = (&inv + inv.transpose()) * 0.5;
        let (lambda_min, lambda_max) = positive_spectrum(&w, "inverse covariance")?;
        Ok(Self {
            kind: WeightingKind::InverseCovariance,
            matrix: w,
            lambda_min,
            lambda_max,
        })
    }

    pub fn kind(&self) -> WeightingKind {
        self.kind
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// `lambda_max / lambda_min`.
    pub fn condition_number(&self) -> f64 {
        self.lambda_max / self.lambda_min
    }
}

fn positive_spectrum(m: &Matrix, what: &str) -> Result<(f64, f64)> {
    let eig = sym_eigenvalues(m)?;
    let (max, min) = (eig[0], eig[eig.len() - 1]);
    if !(min > 0.0) {
        return Err(Error::invalid(format!(
            "{what} must be positive definite (lambda_min = {min:e})"
        )));
    }
    Ok((min, max))
}

/// Everything computed at one `theta` for the objective.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveReport {
    pub theta: Vector,
    /// `Q = 1/2 g'Wg`
    pub q: f64,
    pub moments: Vector,
    pub jacobian: Matrix,
    /// `G'W g`
    pub grad: Vector,
    /// `||g||_W = sqrt(g'Wg)`
    pub weighted_norm: f64,
    pub in_bounds: bool,
}

fn checked_moments<M: MomentModel + ?Sized>(
    model: &M,
    w: &Weighting,
    theta: &Vector,
) -> Result<Vector> {
    if theta.len() != model.param_dim() {
        return Err(Error::invalid(format!(
            "theta has length {}, model expects {}",
            theta.len(),
            model.param_dim()
        )));
    }
    if w.dim() != model.moment_dim() {
        return Err(Error::invalid(format!(
            "weighting is {}x{}, model has {} moments",
            w.dim(),
            w.dim(),
            model.moment_dim()
        )));
    }
    let g = model.moments(theta).map_err(|e| match e {
        Error::Evaluation { .. } => e,
        other => Error::evaluation(theta.as_slice(), other.to_string()),
    })?;
    if g.len() != model.moment_dim() {
        return Err(Error::evaluation(
            theta.as_slice(),
            format!("model returned {} moments, expected {}", g.len(), model.moment_dim()),
        ));
    }
    if !g.iter().all(|x| x.is_finite()) {
        return Err(Error::evaluation(theta.as_slice(), "non-finite moments"));
    }
    Ok(g)
}

fn weighted_sq(w: &Weighting, g: &Vector) -> f64 {
    if w.kind() == WeightingKind::Identity {
        g.norm_squared()
    } else {
        g.dot(&(w.matrix() * g)).max(0.0)
    }
}

/// `||g(theta)||_W` without computing the Jacobian.
pub fn weighted_moment_norm<M: MomentModel + ?Sized>(
    model: &M,
    w: &Weighting,
    theta: &Vector,
) -> Result<f64> {
    let g = checked_moments(model, w, theta)?;
    Ok(weighted_sq(w, &g).sqrt())
}

/// `Q(theta)` alone.
pub fn objective_value<M: MomentModel + ?Sized>(
    model: &M,
    w: &Weighting,
    theta: &Vector,
) -> Result<f64> {
    let g = checked_moments(model, w, theta)?;
    Ok(0.5 * weighted_sq(w, &g))
}

pub fn objective<M: MomentModel + ?Sized>(
    model: &M,
    w: &Weighting,
    theta: &Vector,
) -> Result<ObjectiveReport> {
    let g = checked_moments(model, w, theta)?;
    let jacobian = model.jacobian(theta)?;
    if jacobian.shape() != (model.moment_dim(), model.param_dim()) {
        return Err(Error::evaluation(theta.as_slice(), "Jacobian has the wrong shape"));
    }
    if !jacobian.iter().all(|x| x.is_finite()) {
        return Err(Error::evaluation(theta.as_slice(), "non-finite Jacobian"));
    }
    let wg = w.matrix() * &g;
    let grad = jacobian.transpose() * &wg;
    let sq = weighted_sq(w, &g);
    Ok(ObjectiveReport {
        theta: theta.clone(),
        q: 0.5 * sq,
        moments: g,
        jacobian,
        grad,
        weighted_norm: sq.sqrt(),
        in_bounds: model.bounds().contains(theta),
    })
}

/// Gradient `G'Wg` of `Q`.
pub fn gradient<M: MomentModel + ?Sized>(
    model: &M,
    w: &Weighting,
    theta: &Vector,
) -> Result<Vector> {
    Ok(objective(model, w, theta)?.grad)
}

pub(crate) fn gauss_newton_from(jacobian: &Matrix, w: &Weighting) -> Matrix {
    let m = jacobian.transpose() * w.matrix() * jacobian;
    (&m + m.transpose()) * 0.5
}

/// The un-inverted Gauss-Newton matrix `G'WG`.
pub fn gn_matrix<M: MomentModel + ?Sized>(
    model: &M,
    w: &Weighting,
    theta: &Vector,
) -> Result<Matrix> {
    checked_moments(model, w, theta)?;
    let jac = model.jacobian(theta)?;
    Ok(gauss_newton_from(&jac, w))
}

/// Exact Hessian of `Q`: `G'WG + sum_i (Wg)_i * Hess(g_i)`.
///
/// Uses the model's analytic moment Hessians when present and central
/// differences of the gradient otherwise.
pub fn full_hessian<M: MomentModel + ?Sized>(
    model: &M,
    w: &Weighting,
    theta: &Vector,
) -> Result<Matrix> {
    match model.analytic_moment_hessians(theta) {
        Some(hessians) => {
            let hessians = hessians?;
            let report = objective(model, w, theta)?;
            let d = model.param_dim();
            if hessians.len() != model.moment_dim()
                || hessians.iter().any(|h| h.shape() != (d, d))
            {
                return Err(Error::evaluation(
                    theta.as_slice(),
                    "moment Hessians have the wrong shape",
                ));
            }
            let wg = w.matrix() * &report.moments;
            let mut h = gauss_newton_from(&report.jacobian, w);
            for (coef, hi) in wg.iter().zip(hessians.iter()) {
                h += hi * *coef;
            }
            Ok((&h + h.transpose()) * 0.5)
        }
        None => full_hessian_fd(model, w, theta),
    }
}

/// Hessian of `Q` by central differences of the gradient, symmetrized.
pub fn full_hessian_fd<M: MomentModel + ?Sized>(
    model: &M,
    w: &Weighting,
    theta: &Vector,
) -> Result<Matrix> {
    let h = finite_diff_jacobian(|t| gradient(model, w, t), theta, StepRule::first_order())?;
    Ok((&h + h.transpose()) * 0.5)
}

/// Which scalar a curvature is reported for: `Q = 1/2 g'Wg` (`Half`) or
/// `g'Wg` (`Double`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HessianConvention {
    Half,
    #[default]
    Double,
}

impl HessianConvention {
    pub fn factor(self) -> f64 {
        match self {
            HessianConvention::Half => 1.0,
            HessianConvention::Double => 2.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{CubeRootModel, GaussianModel, LinearModel};
    use approx::assert_relative_eq;

    #[test]
    fn bounds_validation() {
        assert!(Bounds::from_slices(&[1.0], &[-1.0]).is_err());
        assert!(Bounds::from_slices(&[0.0, 0.0], &[1.0]).is_err());
        let b = Bounds::from_slices(&[-1.0], &[1.0]).unwrap();
        assert!(b.contains(&Vector::from_vec(vec![1.0])));
        assert!(!b.contains(&Vector::from_vec(vec![1.5])));
        assert_eq!(b.project(&Vector::from_vec(vec![4.4]))[0], 1.0);
    }

    #[test]
    fn weighting_must_be_pd() {
        let bad = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, -1.0]));
        assert!(Weighting::fixed(bad.clone()).is_err());
        assert!(Weighting::inverse_covariance(&bad).is_err());
        let asym = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(Weighting::fixed(asym).is_err());
        let w = Weighting::fixed(Matrix::from_diagonal(&Vector::from_vec(vec![1.0, 4.0]))).unwrap();
        assert_relative_eq!(w.lambda_min(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(w.lambda_max(), 4.0, epsilon = 1e-12);
        assert_relative_eq!(w.condition_number(), 4.0, epsilon = 1e-12);
        let v = Matrix::from_diagonal(&Vector::from_vec(vec![2.0, 0.5]));
        let w = Weighting::inverse_covariance(&v).unwrap();
        assert_relative_eq!(w.matrix()[(0, 0)], 0.5, epsilon = 1e-14);
        assert_relative_eq!(w.matrix()[(1, 1)], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn objective_at_cube_root() {
        let m = CubeRootModel::new(0.7);
        let w = Weighting::identity(1);
        let r = objective(&m, &w, &Vector::from_vec(vec![0.7])).unwrap();
        assert_eq!(r.q, 0.0);
        assert_eq!(r.grad[0], 0.0);
    }

    #[test]
    fn objective_invariants() {
        let m = GaussianModel::population(0.0, 1.0).unwrap();
        let w = Weighting::identity(3);
        let r = objective(&m, &w, &Vector::from_vec(vec![0.3, 0.6])).unwrap();
        assert_eq!(r.weighted_norm, r.moments.norm());
        assert_relative_eq!(r.q, 0.5 * r.weighted_norm.powi(2), epsilon = 1e-15);
        let at_truth = objective(&m, &w, &Vector::from_vec(vec![0.0, 1.0])).unwrap();
        assert_eq!(at_truth.q, 0.0);
    }

    #[test]
    fn objective_rejects_bad_dimensions() {
        let m = CubeRootModel::new(0.0);
        let w = Weighting::identity(2);
        assert!(objective(&m, &w, &Vector::from_vec(vec![0.0])).is_err());
        let w = Weighting::identity(1);
        assert!(objective(&m, &w, &Vector::from_vec(vec![0.0, 1.0])).is_err());
    }

    #[test]
    fn gn_matrix_of_identity_jacobian() {
        let m = LinearModel::new(Matrix::identity(2, 2), Vector::zeros(2)).unwrap();
        let g = gn_matrix(&m, &Weighting::identity(2), &Vector::from_vec(vec![3.0, 1.0])).unwrap();
        assert_eq!(g, Matrix::identity(2, 2));
    }

    #[test]
    fn full_hessian_equals_gn_at_root() {
        let m = GaussianModel::population(0.0, 1.0).unwrap();
        let w = Weighting::identity(3);
        let theta = Vector::from_vec(vec![0.0, 1.0]);
        let h = full_hessian(&m, &w, &theta).unwrap();
        let g = gn_matrix(&m, &w, &theta).unwrap();
        assert_relative_eq!(h, g, epsilon = 1e-12);
        let hfd = full_hessian_fd(&m, &w, &theta).unwrap();
        assert_relative_eq!(hfd, g, epsilon = 1e-5);
    }

    #[test]
    fn conventions() {
        assert_eq!(HessianConvention::Half.factor(), 1.0);
        assert_eq!(HessianConvention::default().factor(), 2.0);
    }
}
