//! MA(1) estimation by indirect inference: simulate `y_t = e_t - theta e_{t-1}`,
//! fit an auxiliary AR(p) by least squares, and match its coefficients to the
//! population AR(p) projection `beta(theta)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Bounds, MomentModel, Weighting};
use crate::numerics::{inverse_spd, solve_spd, Matrix, Vector};

/// Default parameter box for MA(1) models.
pub const MA1_BOUND: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ma1Spec {
    pub theta_true: f64,
    pub n: usize,
    pub p: usize,
    pub seed: u64,
}

impl Ma1Spec {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_true.abs() < 1.0) {
            return Err(Error::invalid(format!(
                "|theta_true| must be < 1, got {}",
                self.theta_true
            )));
        }
        if self.p == 0 {
            return Err(Error::invalid("AR order p must be at least 1"));
        }
        if self.n <= self.p + 10 {
            return Err(Error::invalid(format!(
                "n = {} must exceed p + 10 = {}",
                self.n,
                self.p + 10
            )));
        }
        Ok(())
    }
}

/// Simulated series `y_1..y_n` together with innovations `e_0..e_n`.
pub fn simulate_ma1_with_innovations(spec: &Ma1Spec) -> Result<(Vec<f64>, Vec<f64>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let e: Vec<f64> = (0..=spec.n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let y = e.windows(2).map(|w| w[1] - spec.theta_true * w[0]).collect();
    Ok((y, e))
}

pub fn simulate_ma1(spec: &Ma1Spec) -> Result<Vec<f64>> {
    Ok(simulate_ma1_with_innovations(spec)?.0)
}

/// Conditional least-squares AR(p) fit without intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct ArFit {
    pub coefficients: Vector,
    /// Residual variance `RSS / n_eff`.
    pub sigma2: f64,
    /// Regressor Gram matrix `X'X`.
    pub gram: Matrix,
    /// Number of regression rows, `n - p`.
    pub n_eff: usize,
}

impl ArFit {
    /// Asymptotic covariance of `sqrt(n) (beta_hat - beta)` under homoskedastic
    /// errors: `sigma2 (X'X / n_eff)^{-1}`.
    pub fn asymptotic_covariance(&self) -> Result<Matrix> {
        let scaled = &self.gram / self.n_eff as f64;
        Ok(inverse_spd(&scaled)? * self.sigma2)
    }

    /// Standard errors of the coefficients, `sqrt(diag(sigma2 (X'X)^{-1}))`.
    pub fn standard_errors(&self) -> Result<Vector> {
        let cov = self.asymptotic_covariance()? / self.n_eff as f64;
        Ok(cov.diagonal().map(f64::sqrt))
    }

    /// `W = V^{-1}` with `V` from [`ArFit::asymptotic_covariance`].
    pub fn optimal_weighting(&self) -> Result<Weighting> {
        Weighting::inverse_covariance(&self.asymptotic_covariance()?)
    }
}

fn design(series: &[f64], p: usize) -> (Matrix, Vector) {
    let rows = series.len() - p;
    let x = Matrix::from_fn(rows, p, |r, c| series[p + r - 1 - c]);
    let y = Vector::from_fn(rows, |r, _| series[p + r]);
    (x, y)
}

/// Regresses `y_t` on `(y_{t-1}, ..., y_{t-p})` for `t = p+1..n`.
pub fn fit_ar(series: &[f64], p: usize) -> Result<ArFit> {
    if p == 0 {
        return Err(Error::invalid("AR order p must be at least 1"));
    }
    if series.len() <= p + 1 {
        return Err(Error::invalid(format!(
            "series of length {} is too short for AR({p})",
            series.len()
        )));
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("series contains non-finite values"));
    }
    let (x, y) = design(series, p);
    let gram = x.transpose() * &x;
    let coefficients = solve_spd(&gram, &(x.transpose() * &y))
        .map_err(|e| Error::invalid(format!("singular AR regressor Gram matrix: {e}")))?;
    let resid = &y - &x * &coefficients;
    let n_eff = y.len();
    Ok(ArFit {
        coefficients,
        sigma2: resid.norm_squared() / n_eff as f64,
        gram,
        n_eff,
    })
}

fn check_theta(theta: f64, p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::invalid("AR order p must be at least 1"));
    }
    if !(theta.abs() < 1.0) {
        return Err(Error::Domain(format!(
            "MA(1) binding function needs |theta| < 1, got {theta}"
        )));
    }
    Ok(())
}

fn toeplitz(first: f64, second: f64, p: usize) -> Matrix {
    Matrix::from_fn(p, p, |i, j| match i.abs_diff(j) {
        0 => first,
        1 => second,
        _ => 0.0,
    })
}

/// Population AR(p) projection coefficients of an MA(1) with parameter `theta`.
pub fn ma1_binding(theta: f64, p: usize) -> Result<Vector> {
    check_theta(theta, p)?;
    if p == 1 {
        return Ok(Vector::from_element(1, -theta / (1.0 + theta * theta)));
    }
    let t = toeplitz(1.0 + theta * theta, -theta, p);
    let mut r = Vector::zeros(p);
    r[0] = -theta;
    let chol = t
        .cholesky()
        .ok_or_else(|| Error::Domain(format!("Toeplitz system not PD at theta = {theta}")))?;
    Ok(chol.solve(&r))
}

/// `(beta, dbeta/dtheta, d2beta/dtheta2)` by implicit differentiation of the
/// Yule-Walker system `T(theta) beta = r(theta)`.
pub fn ma1_binding_derivatives(theta: f64, p: usize) -> Result<(Vector, Vector, Vector)> {
    check_theta(theta, p)?;
    derivatives_closed(theta, p)
}

/// Derivatives on the closed interval `|theta| <= 1`, where the Toeplitz
/// matrix is still positive definite for finite `p`.
fn derivatives_closed(theta: f64, p: usize) -> Result<(Vector, Vector, Vector)> {
    if !(theta.abs() <= 1.0) {
        return Err(Error::Domain(format!(
            "MA(1) derivatives need |theta| <= 1, got {theta}"
        )));
    }
    let t = toeplitz(1.0 + theta * theta, -theta, p);
    let dt = toeplitz(2.0 * theta, -1.0, p);
    let chol = t
        .cholesky()
        .ok_or_else(|| Error::Domain(format!("Toeplitz system not PD at theta = {theta}")))?;
    let mut r = Vector::zeros(p);
    r[0] = -theta;
    let mut dr = Vector::zeros(p);
    dr[0] = -1.0;
    let beta = chol.solve(&r);
    let d1 = chol.solve(&(dr - &dt * &beta));
    let d2 = chol.solve(&(-(&dt * &d1) * 2.0 - &beta * 2.0));
    Ok((beta, d1, d2))
}

/// `g(theta) = beta_hat - beta(theta)` with analytic derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Ma1Model {
    beta_hat: Vector,
    bounds: Bounds,
}

impl Ma1Model {
    pub fn new(beta_hat: Vector) -> Result<Self> {
        if beta_hat.is_empty() || beta_hat.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("beta_hat must be non-empty and finite"));
        }
        Ok(Self {
            beta_hat,
            bounds: Bounds::from_slices(&[-MA1_BOUND], &[MA1_BOUND])?,
        })
    }

    /// Just-identified model whose exact root is `theta_hat`.
    pub fn calibrated(theta_hat: f64) -> Result<Self> {
        Self::new(ma1_binding(theta_hat, 1)?)
    }

    /// The calibrated sample with root at `-0.339`.
    pub fn table1() -> Self {
        Self::calibrated(-0.339).expect("-0.339 is inside (-1, 1)")
    }

    pub fn with_bounds(mut self, bounds: Bounds) -> Result<Self> {
        if bounds.dim() != 1 {
            return Err(Error::invalid("MA(1) model has one parameter"));
        }
        self.bounds = bounds;
        Ok(self)
    }

    pub fn p(&self) -> usize {
        self.beta_hat.len()
    }

    pub fn beta_hat(&self) -> &Vector {
        &self.beta_hat
    }
}

impl MomentModel for Ma1Model {
    fn param_dim(&self) -> usize {
        1
    }

    fn moment_dim(&self) -> usize {
        self.p()
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn moments(&self, theta: &Vector) -> Result<Vector> {
        Ok(&self.beta_hat - ma1_binding(theta[0], self.p())?)
    }

    /// Defined on the closed interval `[-1, 1]`, so rank diagnostics can
    /// reach the boundary where `G` vanishes.
    fn analytic_jacobian(&self, theta: &Vector) -> Option<Result<Matrix>> {
        let p = self.p();
        Some(derivatives_closed(theta[0], p).map(|(_, d1, _)| {
            Matrix::from_column_slice(p, 1, (-d1).as_slice())
        }))
    }

    fn analytic_moment_hessians(&self, theta: &Vector) -> Option<Result<Vec<Matrix>>> {
        Some(
            ma1_binding_derivatives(theta[0], self.p())
                .map(|(_, _, d2)| d2.iter().map(|v| Matrix::from_element(1, 1, -v)).collect()),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ma1Weighting {
    #[default]
    Identity,
    Optimal,
}

/// A simulated MA(1) sample with its fitted auxiliary model.
#[derive(Debug, Clone)]
pub struct Ma1Instance {
    pub spec: Ma1Spec,
    pub series: Vec<f64>,
    pub fit: ArFit,
    pub model: Ma1Model,
    pub weighting: Weighting,
}

/// Simulates, fits AR(p) and builds the moment model with the chosen weighting.
pub fn ma1_moment_model(spec: &Ma1Spec, weighting: Ma1Weighting) -> Result<Ma1Instance> {
    let series = simulate_ma1(spec)?;
    let fit = fit_ar(&series, spec.p)?;
    let model = Ma1Model::new(fit.coefficients.clone())?;
    let weighting = match weighting {
        Ma1Weighting::Identity => Weighting::identity(spec.p),
        Ma1Weighting::Optimal => fit.optimal_weighting()?,
    };
    Ok(Ma1Instance {
        spec: *spec,
        series,
        fit,
        model,
        weighting,
    })
}
