use serde::Serialize;

use super::eval;
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Vector};

/// `d + 1` vertices kept sorted by objective value, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    vertices: Vec<Vector>,
    values: Vec<f64>,
}

const MIN_VOLUME: f64 = 1e-14;

impl Simplex {
    /// Evaluates `f` at each vertex. Vertices must be affinely independent.
    pub fn new<F: Fn(&Vector) -> Result<f64>>(f: &F, vertices: Vec<Vector>) -> Result<Self> {
        let d = vertices.first().map_or(0, |v| v.len());
        if d == 0 || vertices.len() != d + 1 || vertices.iter().any(|v| v.len() != d) {
            return Err(Error::invalid("a simplex needs d + 1 vertices of dimension d >= 1"));
        }
        let edges = Matrix::from_fn(d, d, |i, j| vertices[j + 1][i] - vertices[0][i]);
        if !(edges.determinant().abs() > MIN_VOLUME) {
            return Err(Error::invalid("simplex vertices are affinely dependent"));
        }
        let values = vertices.iter().map(|v| eval(f, v)).collect::<Result<Vec<_>>>()?;
        let mut s = Self { vertices, values };
        s.sort();
        Ok(s)
    }

    /// `theta1` plus `theta1 + delta_j e_j` with `delta_j = 0.05 max(1, |theta1_j|)`.
    pub fn around<F: Fn(&Vector) -> Result<f64>>(f: &F, theta1: &Vector) -> Result<Self> {
        let mut vertices = vec![theta1.clone()];
        for j in 0..theta1.len() {
            let mut v = theta1.clone();
            v[j] += 0.05 * theta1[j].abs().max(1.0);
            vertices.push(v);
        }
        Self::new(f, vertices)
    }

    fn sort(&mut self) {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.vertices = idx.iter().map(|&i| self.vertices[i].clone()).collect();
        self.values = idx.iter().map(|&i| self.values[i]).collect();
    }

    fn replace_worst(&mut self, v: Vector, q: f64) {
        let last = self.values.len() - 1;
        self.vertices[last] = v;
        self.values[last] = q;
        self.sort();
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn best(&self) -> (&Vector, f64) {
        (&self.vertices[0], self.values[0])
    }

    /// Centroid of all vertices except the worst.
    pub fn centroid(&self) -> Vector {
        let p = self.vertices.len() - 1;
        let mut c = Vector::zeros(self.vertices[0].len());
        for v in &self.vertices[..p] {
            c += v;
        }
        c / p as f64
    }

    /// Standard deviation of the vertex values with divisor `d + 1`.
    pub fn value_sd(&self) -> f64 {
        let n = self.values.len() as f64;
        let mean = self.values.iter().sum::<f64>() / n;
        (self.values.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / n).sqrt()
    }
}

/// `theta_c + alpha (theta_c - worst)`
pub fn reflect(centroid: &Vector, worst: &Vector, alpha: f64) -> Vector {
    centroid + (centroid - worst) * alpha
}

/// `theta_r + (gamma - 1)(theta_r - theta_c)`
pub fn expand(reflected: &Vector, centroid: &Vector, gamma: f64) -> Vector {
    reflected + (reflected - centroid) * (gamma - 1.0)
}

/// `theta_c + beta (worst - theta_c)`
pub fn reduce(centroid: &Vector, worst: &Vector, beta: f64) -> Vector {
    centroid + (worst - centroid) * beta
}

/// `best + beta' (theta - best)`
pub fn contract(best: &Vector, theta: &Vector, beta_prime: f64) -> Vector {
    best + (theta - best) * beta_prime
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NelderMeadConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub beta: f64,
    pub beta_prime: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            gamma: 2.0,
            beta: 0.5,
            beta_prime: 0.5,
            tol: 1e-8,
            max_iter: 10_000,
        }
    }
}

impl NelderMeadConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.alpha > 0.0
            && self.gamma > 1.0
            && self.beta > 0.0
            && self.beta < 1.0
            && self.beta_prime > 0.0
            && self.beta_prime < 1.0
            && self.tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid Nelder-Mead coefficients: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NmMove {
    Reflect,
    Expand,
    Reduce,
    Contract,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NmRecord {
    pub iteration: usize,
    pub best: Vec<f64>,
    pub best_value: f64,
    pub value_sd: f64,
    pub last_move: NmMove,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub best: Vector,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub simplex: Simplex,
    pub trace: Vec<NmRecord>,
}

/// Nelder-Mead with reflection, expansion, reduction toward the centroid and
/// contraction toward the best vertex. Stops when the standard deviation of
/// the vertex values drops below `tol` or after `max_iter` passes.
pub fn nelder_mead<F: Fn(&Vector) -> Result<f64>>(
    f: F,
    simplex0: Simplex,
    cfg: &NelderMeadConfig,
) -> Result<NelderMeadResult> {
    cfg.validate()?;
    let mut s = simplex0;
    let p = s.vertices.len() - 1;
    let mut evaluations = 0usize;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut f_count = |t: &Vector| {
        evaluations += 1;
        eval(&f, t)
    };
    while iterations < cfg.max_iter {
        if s.value_sd() < cfg.tol {
            converged = true;
            break;
        }
        iterations += 1;
        let c = s.centroid();
        let r = reflect(&c, &s.vertices[p], cfg.alpha);
        let qr = f_count(&r)?;
        let last_move = if qr < s.values[0] {
            let e = expand(&r, &c, cfg.gamma);
            let qe = f_count(&e)?;
            if qe < qr {
                s.replace_worst(e, qe);
            } else {
                s.replace_worst(r, qr);
            }
            NmMove::Expand
        } else if qr <= s.values[p - 1] {
            s.replace_worst(r, qr);
            NmMove::Reflect
        } else {
            if qr < s.values[p] {
                let last = p;
                s.vertices[last] = r;
                s.values[last] = qr;
            }
            let red = reduce(&c, &s.vertices[p], cfg.beta);
            let qs = f_count(&red)?;
            if qs < s.values[p] {
                s.replace_worst(red, qs);
                NmMove::Reduce
            } else {
                let best = s.vertices[0].clone();
                for l in 1..=p {
                    let v = contract(&best, &s.vertices[l], cfg.beta_prime);
                    s.values[l] = f_count(&v)?;
                    s.vertices[l] = v;
                }
                s.sort();
                NmMove::Contract
            }
        };
        trace.push(NmRecord {
            iteration: iterations,
            best: s.vertices[0].as_slice().to_vec(),
            best_value: s.values[0],
            value_sd: s.value_sd(),
            last_move,
        });
    }
    if !converged && s.value_sd() < cfg.tol {
        converged = true;
    }
    Ok(NelderMeadResult {
        best: s.vertices[0].clone(),
        value: s.values[0],
        iterations,
        evaluations,
        converged,
        simplex: s,
        trace,
    })
}
