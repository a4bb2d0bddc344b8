use crate::error::{Error, Result};
use crate::model::{Bounds, MomentModel};
use crate::numerics::{Matrix, Vector};

/// `g(theta) = A theta - b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    a: Matrix,
    b: Vector,
    bounds: Bounds,
}

impl LinearModel {
    pub fn new(a: Matrix, b: Vector) -> Result<Self> {
        if a.nrows() != b.len() || a.ncols() == 0 || a.nrows() < a.ncols() {
            return Err(Error::invalid(format!(
                "need an m x d matrix with m >= d and b of length m, got {}x{} and {}",
                a.nrows(),
                a.ncols(),
                b.len()
            )));
        }
        if a.iter().chain(b.iter()).any(|x| !x.is_finite()) {
            return Err(Error::invalid("linear model coefficients must be finite"));
        }
        let d = a.ncols();
        let bounds = Bounds::new(Vector::from_element(d, -10.0), Vector::from_element(d, 10.0))?;
        Ok(Self { a, b, bounds })
    }

    pub fn with_bounds(mut self, bounds: Bounds) -> Result<Self> {
        if bounds.dim() != self.a.ncols() {
            return Err(Error::invalid("bounds dimension does not match"));
        }
        self.bounds = bounds;
        Ok(self)
    }
}

impl MomentModel for LinearModel {
    fn param_dim(&self) -> usize {
        self.a.ncols()
    }

    fn moment_dim(&self) -> usize {
        self.a.nrows()
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn moments(&self, theta: &Vector) -> Result<Vector> {
        Ok(&self.a * theta - &self.b)
    }

    fn analytic_jacobian(&self, _theta: &Vector) -> Option<Result<Matrix>> {
        Some(Ok(self.a.clone()))
    }

    fn analytic_moment_hessians(&self, _theta: &Vector) -> Option<Result<Vec<Matrix>>> {
        let d = self.a.ncols();
        Some(Ok(vec![Matrix::zeros(d, d); self.a.nrows()]))
    }
}

/// The model `theta -> inner(c * theta)`, i.e. `inner` in coordinates
/// `vartheta = theta / c`.
#[derive(Debug, Clone)]
pub struct Rescaled<M> {
    inner: M,
    scale: f64,
    bounds: Bounds,
}

impl<M: MomentModel> Rescaled<M> {
    pub fn new(inner: M, scale: f64) -> Result<Self> {
        if !scale.is_finite() || scale == 0.0 {
            return Err(Error::invalid("scale must be finite and non-zero"));
        }
        let lo = inner.bounds().lower() / scale;
        let hi = inner.bounds().upper() / scale;
        let lower = lo.zip_map(&hi, f64::min);
        let upper = lo.zip_map(&hi, f64::max);
        let bounds = Bounds::new(lower, upper)?;
        Ok(Self { inner, scale, bounds })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    /// Maps a point in the rescaled coordinates to the inner model's.
    pub fn to_inner(&self, vartheta: &Vector) -> Vector {
        vartheta * self.scale
    }
}

impl<M: MomentModel> MomentModel for Rescaled<M> {
    fn param_dim(&self) -> usize {
        self.inner.param_dim()
    }

    fn moment_dim(&self) -> usize {
        self.inner.moment_dim()
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn moments(&self, theta: &Vector) -> Result<Vector> {
        self.inner.moments(&self.to_inner(theta))
    }

    fn analytic_jacobian(&self, theta: &Vector) -> Option<Result<Matrix>> {
        let c = self.scale;
        self.inner
            .analytic_jacobian(&self.to_inner(theta))
            .map(|j| j.map(|j| j * c))
    }

    fn analytic_moment_hessians(&self, theta: &Vector) -> Option<Result<Vec<Matrix>>> {
        let c2 = self.scale * self.scale;
        self.inner
            .analytic_moment_hessians(&self.to_inner(theta))
            .map(|hs| hs.map(|hs| hs.into_iter().map(|h| h * c2).collect()))
    }

    fn jacobian(&self, theta: &Vector) -> Result<Matrix> {
        Ok(self.inner.jacobian(&self.to_inner(theta))? * self.scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::CubeRootModel;

    #[test]
    fn rejects_under_identified() {
        assert!(LinearModel::new(Matrix::zeros(1, 2), Vector::zeros(1)).is_err());
    }

    #[test]
    fn rescaled_chain_rule() {
        let m = Rescaled::new(CubeRootModel::new(1.0), 2.0).unwrap();
        let t = Vector::from_element(1, 0.0);
        // g = (1 - 2t)^3, dg/dt = -6 (1 - 2t)^2
        assert_eq!(m.moments(&t).unwrap()[0], 1.0);
        assert_eq!(m.jacobian(&t).unwrap()[(0, 0)], -6.0);
        assert_eq!(m.bounds().lower()[0], -4.5);
        let neg = Rescaled::new(CubeRootModel::new(1.0), -2.0).unwrap();
        assert!(neg.bounds().lower()[0] < neg.bounds().upper()[0]);
    }
}
