//! Iterations `theta_{k+1} = theta_k - gamma P_k G'W g` with a choice of
//! conditioning matrix, and a globalized variant that compares each local step
//! against a predetermined quasi-random candidate.

mod trace;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use trace::{
    ConditioningStatus, ConvergenceReason, IterationRecord, IterationTrace, Termination,
};

use crate::error::{Error, Result};
use crate::model::{full_hessian, gauss_newton_from, objective, Bounds, MomentModel, ObjectiveReport, Weighting};
use crate::numerics::{solve_spd, solve_symmetric, sym_eigenvalues, Matrix, Vector, RANK_TOL};
use crate::quasirandom::box_candidates;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Gradient descent, `P = I`.
    Gd,
    /// Gauss-Newton, `P = (G'WG)^{-1}`.
    Gn,
    /// Newton-Raphson, `P` is the inverse Hessian of `Q`.
    Nr,
    /// Levenberg-Marquardt, `P = (G'WG + lambda I)^{-1}`.
    Lm,
    /// Quasi-Newton with BFGS inverse-Hessian updates.
    Bfgs,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Gd, Method::Gn, Method::Nr, Method::Lm, Method::Bfgs];

    pub fn name(self) -> &'static str {
        match self {
            Method::Gd => "gd",
            Method::Gn => "gn",
            Method::Nr => "nr",
            Method::Lm => "lm",
            Method::Bfgs => "bfgs",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown method {s:?} (expected gd, gn, nr, lm or bfgs)")))
    }
}

/// Settings for the globalized iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalStepConfig {
    /// Number of candidates; iteration `k` uses candidate `k`.
    pub length: usize,
    pub seed: u64,
    /// Candidate box; the model's bounds when absent.
    #[serde(default)]
    pub lower: Option<Vec<f64>>,
    #[serde(default)]
    pub upper: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub method: Method,
    pub gamma: f64,
    pub lm_lambda: f64,
    pub max_iter: usize,
    pub step_tol: f64,
    pub grad_tol: f64,
    pub project_to_bounds: bool,
    /// Refuse Newton steps through indefinite Hessians.
    pub nr_require_pd: bool,
    pub global_step: Option<GlobalStepConfig>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: Method::Gn,
            gamma: 0.1,
            lm_lambda: 0.0,
            max_iter: 100,
            step_tol: 1e-10,
            grad_tol: 1e-8,
            project_to_bounds: false,
            nr_require_pd: false,
            global_step: None,
        }
    }
}

impl OptimizerConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn lm_lambda(mut self, lambda: f64) -> Self {
        self.lm_lambda = lambda;
        self
    }

    pub fn tolerances(mut self, step_tol: f64, grad_tol: f64) -> Self {
        self.step_tol = step_tol;
        self.grad_tol = grad_tol;
        self
    }

    pub fn global_step(mut self, global: GlobalStepConfig) -> Self {
        self.global_step = Some(global);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config(format!("gamma must be in (0, 1], got {}", self.gamma)));
        }
        if !(self.lm_lambda >= 0.0) || !self.lm_lambda.is_finite() {
            return Err(Error::Config(format!("lm_lambda must be >= 0, got {}", self.lm_lambda)));
        }
        if !(self.step_tol > 0.0) || !(self.grad_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if let Some(g) = &self.global_step {
            if g.length == 0 {
                return Err(Error::Config("global step needs at least one candidate".into()));
            }
            if g.lower.is_some() != g.upper.is_some() {
                return Err(Error::Config("global step box needs both lower and upper".into()));
            }
        }
        Ok(())
    }
}

/// The un-inverted conditioning matrix `P^{-1}` for `method` at `theta`.
///
/// BFGS carries state across iterations; its initial matrix, the identity, is
/// returned. Newton-Raphson fails only on a singular Hessian.
pub fn conditioning_matrix<M: MomentModel + ?Sized>(
    method: Method,
    model: &M,
    w: &Weighting,
    theta: &Vector,
    lm_lambda: f64,
) -> Result<Matrix> {
    let d = model.param_dim();
    match method {
        Method::Gd | Method::Bfgs => Ok(Matrix::identity(d, d)),
        Method::Gn => crate::model::gn_matrix(model, w, theta),
        Method::Lm => {
            if !(lm_lambda >= 0.0) {
                return Err(Error::invalid("lm_lambda must be >= 0"));
            }
            Ok(crate::model::gn_matrix(model, w, theta)? + Matrix::identity(d, d) * lm_lambda)
        }
        Method::Nr => {
            let h = full_hessian(model, w, theta)?;
            let eig = sym_eigenvalues(&h)?;
            let abs_max = eig.amax();
            if !(abs_max > 0.0) || eig.amin() <= RANK_TOL * abs_max {
                return Err(Error::SingularConditioning {
                    lambda_min: eig.min(),
                    lambda_max: eig.max(),
                });
            }
            Ok(h)
        }
    }
}

/// BFGS inverse-Hessian update. Returns the new matrix and whether the update
/// was skipped because `s'y <= 1e-12 |s| |y|`.
pub fn bfgs_update(p: &Matrix, s: &Vector, y: &Vector) -> (Matrix, bool) {
    let sy = s.dot(y);
    if !(sy > 1e-12 * s.norm() * y.norm()) {
        return (p.clone(), true);
    }
    let rho = 1.0 / sy;
    let n = p.nrows();
    let left = Matrix::identity(n, n) - (s * y.transpose()) * rho;
    let updated = &left * p * left.transpose() + (s * s.transpose()) * rho;
    ((&updated + updated.transpose()) * 0.5, false)
}

struct Direction {
    d: Vector,
    status: ConditioningStatus,
}

fn singular(e: Error) -> Termination {
    match e {
        Error::SingularConditioning { lambda_min, lambda_max } => {
            Termination::StepFailure { lambda_min, lambda_max }
        }
        other => Termination::EvaluationError {
            k: 0,
            reason: other.to_string(),
        },
    }
}

fn direction<M: MomentModel + ?Sized>(
    cfg: &OptimizerConfig,
    model: &M,
    w: &Weighting,
    at: &ObjectiveReport,
    bfgs_p: &Matrix,
) -> Result<Direction> {
    let ok = |d| Direction { d, status: ConditioningStatus::Ok };
    match cfg.method {
        Method::Gd => Ok(ok(at.grad.clone())),
        Method::Bfgs => Ok(ok(bfgs_p * &at.grad)),
        Method::Gn => solve_spd(&gauss_newton_from(&at.jacobian, w), &at.grad).map(ok),
        Method::Lm => {
            let d = at.theta.len();
            let a = gauss_newton_from(&at.jacobian, w) + Matrix::identity(d, d) * cfg.lm_lambda;
            solve_spd(&a, &at.grad).map(ok)
        }
        Method::Nr => {
            let h = full_hessian(model, w, &at.theta)?;
            if cfg.nr_require_pd {
                return solve_spd(&h, &at.grad).map(ok);
            }
            let d = solve_symmetric(&h, &at.grad)?;
            let status = if sym_eigenvalues(&h)?.min() < 0.0 {
                ConditioningStatus::Indefinite
            } else {
                ConditioningStatus::Ok
            };
            Ok(Direction { d, status })
        }
    }
}

fn record(k: usize, r: &ObjectiveReport, step_norm: f64, status: ConditioningStatus, global: bool) -> IterationRecord {
    IterationRecord {
        k,
        theta: r.theta.clone(),
        q: r.q,
        step_norm,
        grad_norm: r.grad.norm(),
        status,
        global_accepted: global,
        in_bounds: r.in_bounds,
    }
}

fn local_step<M: MomentModel + ?Sized>(
    cfg: &OptimizerConfig,
    model: &M,
    w: &Weighting,
    at: &ObjectiveReport,
    bfgs_p: &Matrix,
) -> std::result::Result<(ObjectiveReport, ConditioningStatus), Termination> {
    let dir = direction(cfg, model, w, at, bfgs_p).map_err(|e| {
        if e.is_evaluation() {
            Termination::EvaluationError { k: 0, reason: e.to_string() }
        } else {
            singular(e)
        }
    })?;
    let mut next = &at.theta - dir.d * cfg.gamma;
    if cfg.project_to_bounds {
        next = model.bounds().project(&next);
    }
    let report = objective(model, w, &next)
        .map_err(|e| Termination::EvaluationError { k: 0, reason: e.to_string() })?;
    Ok((report, dir.status))
}

fn with_k(t: Termination, k: usize) -> Termination {
    match t {
        Termination::EvaluationError { reason, .. } => Termination::EvaluationError { k, reason },
        other => other,
    }
}

/// Runs the iteration from `theta0`. When `cfg.global_step` is set, builds
/// the shifted Sobol candidates and delegates to [`run_global`].
pub fn run<M: MomentModel + ?Sized>(
    model: &M,
    w: &Weighting,
    theta0: &Vector,
    cfg: &OptimizerConfig,
) -> Result<IterationTrace> {
    cfg.validate()?;
    if let Some(g) = &cfg.global_step {
        let bounds = match (&g.lower, &g.upper) {
            (Some(lo), Some(hi)) => Bounds::from_slices(lo, hi)?,
            _ => model.bounds().clone(),
        };
        if bounds.dim() != model.param_dim() {
            return Err(Error::Config("global step box has the wrong dimension".into()));
        }
        let candidates = box_candidates(&bounds, g.length, g.seed)?;
        return run_global(model, w, theta0, cfg, &candidates);
    }
    iterate(model, w, theta0, cfg, None)
}

/// Globalized iteration: after each local step, candidate `k` replaces the
/// local iterate when its weighted moment norm is smaller or when the local
/// step fails.
pub fn run_global<M: MomentModel + ?Sized>(
    model: &M,
    w: &Weighting,
    theta0: &Vector,
    cfg: &OptimizerConfig,
    candidates: &[Vector],
) -> Result<IterationTrace> {
    cfg.validate()?;
    if candidates.iter().any(|c| c.len() != model.param_dim()) {
        return Err(Error::invalid("candidate dimension does not match the model"));
    }
    iterate(model, w, theta0, cfg, Some(candidates))
}

fn iterate<M: MomentModel + ?Sized>(
    model: &M,
    w: &Weighting,
    theta0: &Vector,
    cfg: &OptimizerConfig,
    candidates: Option<&[Vector]>,
) -> Result<IterationTrace> {
    if theta0.len() != model.param_dim() {
        return Err(Error::invalid(format!(
            "theta0 has length {}, model expects {}",
            theta0.len(),
            model.param_dim()
        )));
    }
    let mut trace = IterationTrace::new();
    let mut current = match objective(model, w, theta0) {
        Ok(r) => r,
        Err(e) if e.is_evaluation() => {
            return Ok(trace.finish(Termination::EvaluationError { k: 0, reason: e.to_string() }))
        }
        Err(e) => return Err(e),
    };
    trace.push(record(0, &current, 0.0, ConditioningStatus::Initial, false));
    let d = model.param_dim();
    let mut bfgs_p = Matrix::identity(d, d);
    for k in 0.. {
        if current.grad.norm() <= cfg.grad_tol {
            return Ok(trace.finish(Termination::Converged(ConvergenceReason::GradTol)));
        }
        if k == cfg.max_iter {
            return Ok(trace.finish(Termination::MaxIter));
        }
        let local = local_step(cfg, model, w, &current, &bfgs_p);
        let candidate = candidates
            .and_then(|c| c.get(k))
            .and_then(|c| objective(model, w, c).ok());
        let (next, mut status, global) = match (local, candidate) {
            (Ok((loc, st)), Some(cand)) => {
                if cand.weighted_norm < loc.weighted_norm {
                    (cand, st, true)
                } else {
                    (loc, st, false)
                }
            }
            (Ok((loc, st)), None) => (loc, st, false),
            (Err(_), Some(cand)) => (cand, ConditioningStatus::LocalFailed, true),
            (Err(t), None) => return Ok(trace.finish(with_k(t, k + 1))),
        };
        let s = &next.theta - &current.theta;
        if cfg.method == Method::Bfgs {
            let (p, skipped) = bfgs_update(&bfgs_p, &s, &(&next.grad - &current.grad));
            bfgs_p = p;
            if skipped && status == ConditioningStatus::Ok {
                status = ConditioningStatus::UpdateSkipped;
            }
        }
        let step_norm = s.norm();
        trace.push(record(k + 1, &next, step_norm, status, global));
        current = next;
        if step_norm <= cfg.step_tol {
            return Ok(trace.finish(Termination::Converged(ConvergenceReason::StepTol)));
        }
    }
    unreachable!("the loop returns at max_iter")
}
