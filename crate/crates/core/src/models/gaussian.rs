use crate::error::{Error, Result};
use crate::model::{Bounds, MomentModel};
use crate::numerics::{Matrix, Vector};

/// Lower bound on the variance parameter inside the default box.
pub const SIGMA2_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaussianMode {
    /// Target moments computed exactly from `(mu, sigma2)`.
    Population { mu: f64, sigma2: f64 },
    /// Target moments estimated from `n` observations.
    Sample { n: usize },
}

/// Matches `(mean, variance, fourth central moment)` of `N(mu, s)` with
/// `theta = (mu, s)`:
///
/// `g(theta) = mu_hat - (mu, s, 3 s^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianModel {
    mode: GaussianMode,
    target: Vector,
    bounds: Bounds,
}

fn default_bounds(center: f64) -> Bounds {
    Bounds::from_slices(&[center - 10.0, SIGMA2_FLOOR], &[center + 10.0, 10.0])
        .expect("static bounds are valid")
}

impl GaussianModel {
    pub fn population(mu: f64, sigma2: f64) -> Result<Self> {
        if !mu.is_finite() || !sigma2.is_finite() || sigma2 <= 0.0 {
            return Err(Error::invalid(format!(
                "population needs finite mu and sigma2 > 0, got ({mu}, {sigma2})"
            )));
        }
        Ok(Self {
            mode: GaussianMode::Population { mu, sigma2 },
            target: Vector::from_vec(vec![mu, sigma2, 3.0 * sigma2 * sigma2]),
            bounds: default_bounds(mu),
        })
    }

    pub fn sample(data: &[f64]) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::invalid("sample mode needs at least 2 observations"));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("sample contains non-finite values"));
        }
        let n = data.len() as f64;
        let mean = data.iter().sum::<f64>() / n;
        let var = data.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
        let m4 = data.iter().map(|y| (y - mean).powi(4)).sum::<f64>() / n;
        Ok(Self {
            mode: GaussianMode::Sample { n: data.len() },
            target: Vector::from_vec(vec![mean, var, m4]),
            bounds: default_bounds(mean),
        })
    }

    pub fn with_bounds(mut self, bounds: Bounds) -> Result<Self> {
        if bounds.dim() != 2 {
            return Err(Error::invalid("gaussian model has two parameters"));
        }
        self.bounds = bounds;
        Ok(self)
    }

    pub fn mode(&self) -> GaussianMode {
        self.mode
    }

    /// `mu_hat`
    pub fn target(&self) -> &Vector {
        &self.target
    }
}

fn variance(theta: &Vector) -> Result<f64> {
    let s = theta[1];
    if s > 0.0 {
        Ok(s)
    } else {
        Err(Error::Domain(format!("variance must be positive, got {s}")))
    }
}

impl MomentModel for GaussianModel {
    fn param_dim(&self) -> usize {
        2
    }

    fn moment_dim(&self) -> usize {
        3
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn moments(&self, theta: &Vector) -> Result<Vector> {
        let s = variance(theta)?;
        Ok(&self.target - Vector::from_vec(vec![theta[0], s, 3.0 * s * s]))
    }

    fn analytic_jacobian(&self, theta: &Vector) -> Option<Result<Matrix>> {
        Some(variance(theta).map(|s| {
            Matrix::from_row_slice(3, 2, &[-1.0, 0.0, 0.0, -1.0, 0.0, -6.0 * s])
        }))
    }

    fn analytic_moment_hessians(&self, theta: &Vector) -> Option<Result<Vec<Matrix>>> {
        Some(variance(theta).map(|_| {
            let mut h3 = Matrix::zeros(2, 2);
            h3[(1, 1)] = -6.0;
            vec![Matrix::zeros(2, 2), Matrix::zeros(2, 2), h3]
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{full_hessian, gn_matrix, Weighting};
    use crate::numerics::sym_eigenvalues;
    use approx::assert_relative_eq;

    fn v(a: f64, b: f64) -> Vector {
        Vector::from_vec(vec![a, b])
    }

    #[test]
    fn zero_at_truth() {
        let m = GaussianModel::population(0.0, 1.0).unwrap();
        assert_eq!(m.moments(&v(0.0, 1.0)).unwrap(), Vector::zeros(3));
    }

    #[test]
    fn gn_matrix_display() {
        let m = GaussianModel::population(0.0, 1.0).unwrap();
        let w = Weighting::identity(3);
        for &s in &[0.2, 0.5, 1.0, 2.0] {
            let g = gn_matrix(&m, &w, &v(0.3, s)).unwrap();
            assert_relative_eq!(g, Matrix::from_diagonal(&v(1.0, 1.0 + 36.0 * s * s)), epsilon = 1e-12);
        }
    }

    #[test]
    fn hessian_eigenvalues_double_convention() {
        let m = GaussianModel::population(0.0, 1.0).unwrap();
        let w = Weighting::identity(3);
        let e = sym_eigenvalues(&(full_hessian(&m, &w, &v(0.0, 1.0)).unwrap() * 2.0)).unwrap();
        assert_relative_eq!(e[0], 74.0, epsilon = 1e-10);
        assert_relative_eq!(e[1], 2.0, epsilon = 1e-10);
        let e = sym_eigenvalues(&(full_hessian(&m, &w, &v(0.0, 0.5)).unwrap() * 2.0)).unwrap();
        assert_relative_eq!(e[0], 2.0, epsilon = 1e-10);
        assert_relative_eq!(e[1], -7.0, epsilon = 1e-10);
    }

    #[test]
    fn non_positive_variance_is_domain_error() {
        let m = GaussianModel::population(0.0, 1.0).unwrap();
        assert!(matches!(m.moments(&v(0.0, 0.0)), Err(Error::Domain(_))));
        assert!(matches!(m.moments(&v(0.0, -1.0)), Err(Error::Domain(_))));
        assert!(GaussianModel::population(0.0, 0.0).is_err());
    }

    #[test]
    fn sample_mode_moments() {
        let m = GaussianModel::sample(&[1.0, -1.0, 1.0, -1.0]).unwrap();
        assert_eq!(m.target().as_slice(), &[0.0, 1.0, 1.0]);
        assert!(GaussianModel::sample(&[1.0]).is_err());
    }
}
