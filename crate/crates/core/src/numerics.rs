//! Small dense linear-algebra kernels and finite differences.
//!
//! Problems in this crate have a handful of parameters and at most a few dozen
//! moments, so everything here is direct (no iterative or sparse machinery).

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative threshold below which an eigenvalue counts as zero in the
/// conditioning solves.
pub const RANK_TOL: f64 = 1e-12;

const SYMMETRY_TOL: f64 = 1e-10;

fn ensure_finite(m: &Matrix) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid("matrix has non-finite entries"))
    }
}

fn ensure_square(m: &Matrix) -> Result<()> {
    if m.nrows() == m.ncols() && m.nrows() > 0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "expected a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

/// Checks near-symmetry and returns the averaged matrix `(S + S')/2`.
pub fn symmetrize(s: &Matrix) -> Result<Matrix> {
    ensure_square(s)?;
    ensure_finite(s)?;
    let scale = s.amax().max(1.0);
    let asym = (s - s.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::invalid(format!(
            "matrix is not symmetric (max asymmetry {asym:e})"
        )));
    }
    Ok((s + s.transpose()) * 0.5)
}

/// Smallest singular value of `m`.
pub fn min_singular_value(m: &Matrix) -> Result<f64> {
    Ok(singular_values(m)?.min())
}

/// Largest singular value (spectral norm) of `m`.
pub fn max_singular_value(m: &Matrix) -> Result<f64> {
    Ok(singular_values(m)?.max())
}

fn singular_values(m: &Matrix) -> Result<Vector> {
    if m.is_empty() {
        return Err(Error::invalid("empty matrix"));
    }
    ensure_finite(m)?;
    Ok(m.clone().singular_values())
}

/// Eigenvalues of a symmetric matrix in descending order.
pub fn sym_eigenvalues(s: &Matrix) -> Result<Vector> {
    let s = symmetrize(s)?;
    let mut vals: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    Ok(Vector::from_vec(vals))
}

/// Solves `A x = b` for symmetric positive-definite `A`.
///
/// Fails with [`Error::SingularConditioning`] when the smallest eigenvalue is
/// not above `RANK_TOL * lambda_max`, which covers both singular and
/// indefinite matrices.
pub fn solve_spd(a: &Matrix, b: &Vector) -> Result<Vector> {
    let a = symmetrize(a)?;
    check_rhs(&a, b)?;
    let eig = SymmetricEigen::new(a.clone());
    let lambda_max = eig.eigenvalues.max();
    let lambda_min = eig.eigenvalues.min();
    if !(lambda_max > 0.0) || lambda_min <= RANK_TOL * lambda_max {
        return Err(Error::SingularConditioning {
            lambda_min,
            lambda_max,
        });
    }
    match a.cholesky() {
        Some(chol) => Ok(chol.solve(b)),
        None => Ok(eigen_solve(&eig, b)),
    }
}

/// Inverse of a symmetric positive-definite matrix, column by column through
/// [`solve_spd`].
pub fn inverse_spd(a: &Matrix) -> Result<Matrix> {
    let n = a.nrows();
    let mut inv = Matrix::zeros(n, n);
    for j in 0..n {
        let mut e = Vector::zeros(n);
        e[j] = 1.0;
        inv.set_column(j, &solve_spd(a, &e)?);
    }
    Ok((&inv + inv.transpose()) * 0.5)
}

/// Solves `A x = b` for symmetric, possibly indefinite, `A`.
///
/// Only fails when `A` is singular: `min |lambda| <= RANK_TOL * max |lambda|`.
pub fn solve_symmetric(a: &Matrix, b: &Vector) -> Result<Vector> {
    let a = symmetrize(a)?;
    check_rhs(&a, b)?;
    let eig = SymmetricEigen::new(a);
    let abs_max = eig.eigenvalues.amax();
    let abs_min = eig.eigenvalues.amin();
    if !(abs_max > 0.0) || abs_min <= RANK_TOL * abs_max {
        return Err(Error::SingularConditioning {
            lambda_min: eig.eigenvalues.min(),
            lambda_max: eig.eigenvalues.max(),
        });
    }
    Ok(eigen_solve(&eig, b))
}

fn check_rhs(a: &Matrix, b: &Vector) -> Result<()> {
    if a.nrows() != b.len() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {}x{} system with rhs of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    if !b.iter().all(|x| x.is_finite()) {
        return Err(Error::invalid("rhs has non-finite entries"));
    }
    Ok(())
}

fn eigen_solve(eig: &SymmetricEigen<f64, nalgebra::Dyn>, b: &Vector) -> Vector {
    let v = &eig.eigenvectors;
    let mut coef = v.transpose() * b;
    for (c, l) in coef.iter_mut().zip(eig.eigenvalues.iter()) {
        *c /= *l;
    }
    v * coef
}

/// Step rule for central differences: `h_j = scale * max(1, |theta_j|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRule {
    pub scale: f64,
}

impl StepRule {
    /// `eps^(1/3)`, balanced for first derivatives.
    pub fn first_order() -> Self {
        Self {
            scale: f64::EPSILON.cbrt(),
        }
    }

    /// `eps^(1/4)`, balanced for second derivatives.
    pub fn second_order() -> Self {
        Self {
            scale: f64::EPSILON.powf(0.25),
        }
    }

    pub fn step(&self, x: f64) -> f64 {
        self.scale * x.abs().max(1.0)
    }
}

impl Default for StepRule {
    fn default() -> Self {
        Self::first_order()
    }
}

fn probe<T, F>(f: &F, point: &Vector) -> Result<T>
where
    F: Fn(&Vector) -> Result<T>,
{
    f(point).map_err(|e| match e {
        Error::Evaluation { .. } => e,
        other => Error::evaluation(point.as_slice(), other.to_string()),
    })
}

/// Central-difference Jacobian of a vector map; column `j` is
/// `[f(theta + h_j e_j) - f(theta - h_j e_j)] / (2 h_j)`.
pub fn finite_diff_jacobian<F>(f: F, theta: &Vector, rule: StepRule) -> Result<Matrix>
where
    F: Fn(&Vector) -> Result<Vector>,
{
    let d = theta.len();
    let mut cols: Vec<Vector> = Vec::with_capacity(d);
    for j in 0..d {
        let h = rule.step(theta[j]);
        let mut plus = theta.clone();
        plus[j] += h;
        let mut minus = theta.clone();
        minus[j] -= h;
        let fp = probe(&f, &plus)?;
        let fm = probe(&f, &minus)?;
        if fp.len() != fm.len() {
            return Err(Error::invalid("map returned vectors of varying length"));
        }
        let col = (fp - fm) / (2.0 * h);
        if !col.iter().all(|x| x.is_finite()) {
            return Err(Error::evaluation(plus.as_slice(), "non-finite value at probe"));
        }
        cols.push(col);
    }
    if cols.is_empty() {
        return Err(Error::invalid("empty parameter vector"));
    }
    Ok(Matrix::from_columns(&cols))
}

/// Central second differences of a scalar map, symmetrized.
pub fn finite_diff_hessian<F>(q: F, theta: &Vector, rule: StepRule) -> Result<Matrix>
where
    F: Fn(&Vector) -> Result<f64>,
{
    let d = theta.len();
    if d == 0 {
        return Err(Error::invalid("empty parameter vector"));
    }
    let eval = |p: &Vector| -> Result<f64> {
        let v = probe(&q, p)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::evaluation(p.as_slice(), "non-finite value at probe"))
        }
    };
    let h: Vec<f64> = theta.iter().map(|&x| rule.step(x)).collect();
    let q0 = eval(theta)?;
    let mut hess = Matrix::zeros(d, d);
    for i in 0..d {
        let mut plus = theta.clone();
        plus[i] += h[i];
        let mut minus = theta.clone();
        minus[i] -= h[i];
        hess[(i, i)] = (eval(&plus)? - 2.0 * q0 + eval(&minus)?) / (h[i] * h[i]);
        for j in 0..i {
            let shifted = |si: f64, sj: f64| {
                let mut p = theta.clone();
                p[i] += si * h[i];
                p[j] += sj * h[j];
                p
            };
            let v = (eval(&shifted(1.0, 1.0))? - eval(&shifted(1.0, -1.0))?
                - eval(&shifted(-1.0, 1.0))?
                + eval(&shifted(-1.0, -1.0))?)
                / (4.0 * h[i] * h[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(hess)
}
