use crate::error::{Error, Result};
use crate::model::{Bounds, MomentModel};
use crate::numerics::{Matrix, Vector};

/// `g(theta) = (ybar - theta)^3`. The Jacobian vanishes at the root, so the
/// rank condition fails exactly where the minimum is.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeRootModel {
    ybar: f64,
    bounds: Bounds,
}

impl CubeRootModel {
    /// Panics if `ybar` is not finite; see [`CubeRootModel::try_new`].
    pub fn new(ybar: f64) -> Self {
        Self::try_new(ybar).expect("ybar must be finite")
    }

    pub fn try_new(ybar: f64) -> Result<Self> {
        if !ybar.is_finite() {
            return Err(Error::invalid("ybar must be finite"));
        }
        let bounds = Bounds::from_slices(&[ybar - 10.0], &[ybar + 10.0])?;
        Ok(Self { ybar, bounds })
    }

    pub fn with_bounds(mut self, bounds: Bounds) -> Result<Self> {
        if bounds.dim() != 1 {
            return Err(Error::invalid("cube-root model has one parameter"));
        }
        self.bounds = bounds;
        Ok(self)
    }

    pub fn ybar(&self) -> f64 {
        self.ybar
    }
}

impl MomentModel for CubeRootModel {
    fn param_dim(&self) -> usize {
        1
    }

    fn moment_dim(&self) -> usize {
        1
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn moments(&self, theta: &Vector) -> Result<Vector> {
        let e = self.ybar - theta[0];
        Ok(Vector::from_element(1, e * e * e))
    }

    fn analytic_jacobian(&self, theta: &Vector) -> Option<Result<Matrix>> {
        let e = self.ybar - theta[0];
        Some(Ok(Matrix::from_element(1, 1, -3.0 * e * e)))
    }

    fn analytic_moment_hessians(&self, theta: &Vector) -> Option<Result<Vec<Matrix>>> {
        let e = self.ybar - theta[0];
        Some(Ok(vec![Matrix::from_element(1, 1, 6.0 * e)]))
    }
}
