use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{gauss_newton_from, objective, objective_value, MomentModel, Weighting};
use crate::numerics::{max_singular_value, min_singular_value, sym_eigenvalues, Matrix, Vector};

pub const DEFAULT_RHO: f64 = 1.0;
pub const DEFAULT_EPSILON: f64 = 1e-4;

/// Constants entering the convergence and misspecification results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceConstants {
    /// Lower bound on `sigma_min[G(theta)]`.
    pub sigma_lower: f64,
    /// Upper bound on `sigma_max[G(theta)]`.
    pub sigma_upper: f64,
    /// Lipschitz constant `L` of `G`.
    pub lipschitz: f64,
    /// Lipschitz constant `L_Q` of the gradient of `Q`.
    pub lipschitz_grad: f64,
    pub lambda_w_lower: f64,
    pub lambda_w_upper: f64,
    /// `min lambda_min[G'WG]`
    pub lambda_lower: f64,
    /// `max lambda_max[G'WG]`
    pub lambda_upper: f64,
    /// Grid nodes skipped because the model failed there.
    pub failed_nodes: usize,
}

impl ConvergenceConstants {
    /// Constants for hand-picked values; the norm-equivalence pair is set to
    /// `sigma^2 lambda_W` bounds.
    pub fn new(
        sigma_lower: f64,
        sigma_upper: f64,
        lipschitz: f64,
        lipschitz_grad: f64,
        lambda_w_lower: f64,
        lambda_w_upper: f64,
    ) -> Result<Self> {
        let c = Self {
            sigma_lower,
            sigma_upper,
            lipschitz,
            lipschitz_grad,
            lambda_w_lower,
            lambda_w_upper,
            lambda_lower: sigma_lower * sigma_lower * lambda_w_lower,
            lambda_upper: sigma_upper * sigma_upper * lambda_w_upper,
            failed_nodes: 0,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.sigma_lower > 0.0
            && self.sigma_lower <= self.sigma_upper
            && self.sigma_upper.is_finite()
            && self.lipschitz >= 0.0
            && self.lipschitz_grad >= 0.0
            && self.lambda_w_lower > 0.0
            && self.lambda_w_lower <= self.lambda_w_upper
            && self.lambda_w_upper.is_finite()
            && self.lambda_lower <= self.lambda_upper;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("inconsistent convergence constants: {self:?}")))
        }
    }

    /// `lambda_W upper / lambda_W lower`
    pub fn kappa_w(&self) -> f64 {
        self.lambda_w_upper / self.lambda_w_lower
    }
}

fn max_pairwise_ratio<T: Sync>(
    nodes: &[(Vector, T)],
    dist: impl Fn(&T, &T) -> f64 + Sync,
) -> f64 {
    (0..nodes.len())
        .into_par_iter()
        .map(|i| {
            let mut best = 0.0f64;
            for j in i + 1..nodes.len() {
                let h = (&nodes[i].0 - &nodes[j].0).norm();
                if h > 0.0 {
                    best = best.max(dist(&nodes[i].1, &nodes[j].1) / h);
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// Grid estimates of the constants. Extremes and Lipschitz ratios are taken
/// over grid nodes and pairs, so they bound the true suprema from the inside.
pub fn estimate_constants<M: MomentModel + ?Sized>(
    model: &M,
    w: &Weighting,
    grid: &[Vector],
) -> Result<ConvergenceConstants> {
    if grid.len() < 2 {
        return Err(Error::invalid("need at least 2 grid nodes"));
    }
    let evals: Vec<Option<(Vector, Matrix, Vector)>> = grid
        .par_iter()
        .map(|t| objective(model, w, t).ok().map(|r| (t.clone(), r.jacobian, r.grad)))
        .collect();
    let failed_nodes = evals.iter().filter(|e| e.is_none()).count();
    let ok: Vec<(Vector, Matrix, Vector)> = evals.into_iter().flatten().collect();
    if ok.len() < 2 {
        return Err(Error::AllFailed { attempted: grid.len() });
    }
    let mut sigma_lower = f64::INFINITY;
    let mut sigma_upper = 0.0f64;
    let mut lambda_lower = f64::INFINITY;
    let mut lambda_upper = 0.0f64;
    for (_, g, _) in &ok {
        sigma_lower = sigma_lower.min(min_singular_value(g)?);
        sigma_upper = sigma_upper.max(max_singular_value(g)?);
        let e = sym_eigenvalues(&gauss_newton_from(g, w))?;
        lambda_lower = lambda_lower.min(e.min());
        lambda_upper = lambda_upper.max(e.max());
    }
    let jac: Vec<(Vector, Matrix)> = ok.iter().map(|(t, g, _)| (t.clone(), g.clone())).collect();
    let grads: Vec<(Vector, Vector)> = ok.iter().map(|(t, _, d)| (t.clone(), d.clone())).collect();
    let lipschitz = max_pairwise_ratio(&jac, |a, b| max_singular_value(&(a - b)).unwrap_or(0.0));
    let lipschitz_grad = max_pairwise_ratio(&grads, |a, b| (a - b).norm());
    Ok(ConvergenceConstants {
        sigma_lower,
        sigma_upper,
        lipschitz,
        lipschitz_grad,
        lambda_w_lower: w.lambda_min(),
        lambda_w_upper: w.lambda_max(),
        lambda_lower,
        lambda_upper,
        failed_nodes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalRadius {
    pub r_tilde: f64,
    /// `min(r_tilde, r_g)`
    pub r: f64,
    /// `r > 0`; otherwise there is no guaranteed neighborhood.
    pub guaranteed: bool,
}

/// `R~ = (1 - gt/g) sigma sqrt(lW/uW) / L - |g_hat|_W / (sigma sqrt(lW))` and
/// `R = min(R~, r_g)`. With `L = 0` the first term is infinite.
pub fn local_radius(
    k: &ConvergenceConstants,
    gamma: f64,
    gamma_tilde: f64,
    g_hat_norm: f64,
    r_g: f64,
) -> Result<LocalRadius> {
    if !(gamma_tilde > 0.0 && gamma_tilde <= gamma && gamma <= 1.0) {
        return Err(Error::invalid("need 0 < gamma_tilde <= gamma <= 1"));
    }
    if !(g_hat_norm >= 0.0) {
        return Err(Error::invalid("moment norm must be non-negative"));
    }
    k.validate()?;
    let lead = if k.lipschitz == 0.0 {
        f64::INFINITY
    } else {
        (1.0 - gamma_tilde / gamma) * k.sigma_lower * (k.lambda_w_lower / k.lambda_w_upper).sqrt()
            / k.lipschitz
    };
    let r_tilde = lead - g_hat_norm / (k.sigma_lower * k.lambda_w_lower.sqrt());
    let r = r_tilde.min(r_g);
    Ok(LocalRadius {
        r_tilde,
        r,
        guaranteed: r > 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MisspecificationBound {
    /// `sigma^2 lW / (L sqrt(uW))`
    pub local: f64,
    /// Half of `local`.
    pub global: f64,
}

/// Largest misspecification levels for local and global convergence; both
/// infinite when `L = 0`.
pub fn misspecification_bound(k: &ConvergenceConstants) -> Result<MisspecificationBound> {
    k.validate()?;
    let local = if k.lipschitz == 0.0 {
        f64::INFINITY
    } else {
        k.sigma_lower * k.sigma_lower * k.lambda_w_lower / (k.lipschitz * k.lambda_w_upper.sqrt())
    };
    Ok(MisspecificationBound {
        local,
        global: local / 2.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormEquivalenceReport {
    /// `min 2[Q(theta) - Q(theta_hat)] / |theta - theta_hat|^2` over the grid.
    pub lambda_lower_emp: f64,
    pub lambda_upper_emp: f64,
    /// `lambda_lower - C |g_hat|_W`
    pub bound_lower: f64,
    /// `lambda_upper + C |g_hat|_W`
    pub bound_upper: f64,
    /// `2 sqrt(uW) L`
    pub c: f64,
    pub g_hat_norm: f64,
    pub violations: Vec<usize>,
}

/// Checks `lo |t - t_hat|^2 <= 2[Q(t) - Q(t_hat)] <= hi |t - t_hat|^2` at each
/// node, with `lo`, `hi` from [`estimate_constants`] on the same grid.
pub fn norm_equivalence_check<M: MomentModel + ?Sized>(
    model: &M,
    w: &Weighting,
    theta_hat: &Vector,
    grid: &[Vector],
) -> Result<NormEquivalenceReport> {
    let k = estimate_constants(model, w, grid)?;
    let hat = objective(model, w, theta_hat)?;
    let c = 2.0 * k.lambda_w_upper.sqrt() * k.lipschitz;
    let bound_lower = k.lambda_lower - c * hat.weighted_norm;
    let bound_upper = k.lambda_upper + c * hat.weighted_norm;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for (i, t) in grid.iter().enumerate() {
        let Ok(q) = objective_value(model, w, t) else { continue };
        let diff = 2.0 * (q - hat.q);
        let dist2 = (t - theta_hat).norm_squared();
        let tol = 1e-12 * diff.abs().max(1.0);
        if diff < bound_lower * dist2 - tol || diff > bound_upper * dist2 + tol {
            violations.push(i);
        }
        if dist2 > 0.0 {
            lo = lo.min(diff / dist2);
            hi = hi.max(diff / dist2);
        }
    }
    Ok(NormEquivalenceReport {
        lambda_lower_emp: lo,
        lambda_upper_emp: hi,
        bound_lower,
        bound_upper,
        c,
        g_hat_norm: hat.weighted_norm,
        violations,
    })
}

/// The three conditions for global convergence under misspecification at a
/// given `(gamma, phi)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem3Report {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub delta: f64,
    /// `phi < sigma^2 lW / (2 L sqrt(uW))`
    pub phi_condition: bool,
    /// `0 < 1 - gamma c1 / 2 + gamma^2 c2 < 1`
    pub gamma_condition: bool,
    /// The `(gamma, phi)` inequality.
    pub pair_condition: bool,
    pub pair_lhs: f64,
    pub pair_rhs: f64,
    pub feasible: bool,
}

pub fn theorem3_conditions(
    gamma: f64,
    phi: f64,
    k: &ConvergenceConstants,
    rho: f64,
    epsilon: f64,
) -> Result<Theorem3Report> {
    k.validate()?;
    if !(gamma > 0.0 && gamma < 1.0) || !(phi >= 0.0) || !(rho > 0.0) || !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid("need gamma in (0,1), phi >= 0, rho > 0, epsilon in (0,1)"));
    }
    let (sl, su, l) = (k.sigma_lower, k.sigma_upper, k.lipschitz);
    let (lw, uw) = (k.lambda_w_lower, k.lambda_w_upper);
    let kappa = k.kappa_w();
    let c1 = 2.0 / 3.0 * rho * rho * ((sl / su).powi(2) / kappa).powi(2);
    let c2 = k.lipschitz_grad * (su * uw.sqrt() / (sl * sl * lw)).powi(2);
    let c3 = 2.0 * su * uw.sqrt();
    let phi_condition = l == 0.0 || phi < sl * sl * lw / (2.0 * l * uw.sqrt());
    let poly = 1.0 - gamma * c1 / 2.0 + gamma * gamma * c2;
    let gamma_condition = poly > 0.0 && poly < 1.0;
    let delta = 0.5 * (sl * sl * lw - 2.0 * l * uw.sqrt() * phi);
    let den = (gamma * c1 / 2.0 - gamma * gamma * c2) * delta * delta;
    let pair_lhs = if delta > 0.0 && den > 0.0 {
        (delta * gamma * gamma * c2 + 2.0 * gamma * c3 * c3 / c1) * phi * phi / den
    } else {
        f64::INFINITY
    };
    let pair_rhs = if l == 0.0 {
        f64::INFINITY
    } else {
        ((1.0 - epsilon) * sl / (l * kappa.sqrt()) - phi / (sl * lw.sqrt())).powi(2)
    };
    let pair_condition = delta > 0.0 && den > 0.0 && pair_lhs < pair_rhs;
    Ok(Theorem3Report {
        c1,
        c2,
        c3,
        delta,
        phi_condition,
        gamma_condition,
        pair_condition,
        pair_lhs,
        pair_rhs,
        feasible: phi_condition && gamma_condition && pair_condition,
    })
}

/// All three conditions of [`theorem3_conditions`] hold.
pub fn theorem3_feasible(
    gamma: f64,
    phi: f64,
    k: &ConvergenceConstants,
    rho: f64,
    epsilon: f64,
) -> Result<bool> {
    Ok(theorem3_conditions(gamma, phi, k, rho, epsilon)?.feasible)
}
