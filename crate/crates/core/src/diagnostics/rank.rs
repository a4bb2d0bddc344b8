use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{MomentModel, Weighting};
use crate::numerics::{min_singular_value, Matrix, Vector};

/// Values at or below this are treated as a rank failure.
pub const RANK_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankGridKind {
    /// `sigma_min[G(theta)]` per node.
    JustIdentified,
    /// `sigma_min[G(theta_i)' W G(theta_j)]` per ordered pair.
    OverIdentified,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankGridReport {
    pub kind: RankGridKind,
    #[serde(skip)]
    pub nodes: Vec<Vector>,
    /// Row-major `rows x cols` values; `NaN` where a node failed.
    #[serde(skip)]
    pub values: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    pub min_value: f64,
    /// `(i, j)` node indices of the minimum (`j = 0` for just-identified grids).
    pub argmin: (usize, usize),
    pub max_value: f64,
    /// The determinant changes sign across the grid, so by continuity it
    /// vanishes somewhere in between.
    pub sign_change: bool,
    pub failed_nodes: Vec<usize>,
    pub threshold: f64,
    pub holds: bool,
}

impl RankGridReport {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn argmin_nodes(&self) -> (&Vector, &Vector) {
        let (i, j) = self.argmin;
        match self.kind {
            RankGridKind::JustIdentified => (&self.nodes[i], &self.nodes[i]),
            RankGridKind::OverIdentified => (&self.nodes[i], &self.nodes[j]),
        }
    }

    pub fn verdict(&self) -> &'static str {
        if self.holds {
            "holds"
        } else {
            "fails"
        }
    }

    /// Long-format CSV. Over-identified grids in one dimension use
    /// `theta1,theta2,sigma_min`; in more dimensions the first two columns
    /// are node indices. Just-identified grids use `theta_1..theta_d,sigma_min`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let d = self.nodes.first().map_or(0, |n| n.len());
        match self.kind {
            RankGridKind::JustIdentified => {
                let mut header: Vec<String> = (1..=d).map(|i| format!("theta_{i}")).collect();
                header.push("sigma_min".into());
                w.write_record(&header)?;
                for (i, node) in self.nodes.iter().enumerate() {
                    let mut row: Vec<String> = node.iter().map(|x| x.to_string()).collect();
                    row.push(self.value(i, 0).to_string());
                    w.write_record(&row)?;
                }
            }
            RankGridKind::OverIdentified => {
                if d == 1 {
                    w.write_record(["theta1", "theta2", "sigma_min"])?;
                } else {
                    w.write_record(["node1", "node2", "sigma_min"])?;
                }
                for i in 0..self.rows {
                    for j in 0..self.cols {
                        let (a, b) = if d == 1 {
                            (self.nodes[i][0].to_string(), self.nodes[j][0].to_string())
                        } else {
                            (i.to_string(), j.to_string())
                        };
                        w.write_record([a, b, self.value(i, j).to_string()])?;
                    }
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn jacobians<M: MomentModel + ?Sized>(model: &M, grid: &[Vector]) -> Result<Vec<Option<Matrix>>> {
    if grid.is_empty() {
        return Err(Error::invalid("rank grid needs at least one node"));
    }
    if grid.iter().any(|t| t.len() != model.param_dim()) {
        return Err(Error::invalid("grid node dimension does not match the model"));
    }
    Ok(grid
        .par_iter()
        .map(|t| {
            model
                .jacobian(t)
                .ok()
                .filter(|j| j.iter().all(|x| x.is_finite()))
        })
        .collect())
}

fn assemble(
    kind: RankGridKind,
    grid: &[Vector],
    values: Vec<f64>,
    dets: Vec<f64>,
    rows: usize,
    cols: usize,
    failed_nodes: Vec<usize>,
) -> Result<RankGridReport> {
    let mut min = (f64::INFINITY, (0, 0));
    let mut max = f64::NEG_INFINITY;
    for (k, v) in values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        if *v < min.0 {
            min = (*v, (k / cols, k % cols));
        }
        max = max.max(*v);
    }
    if min.0.is_infinite() {
        return Err(Error::AllFailed { attempted: grid.len() });
    }
    let pos = dets.iter().any(|d| *d > 0.0);
    let neg = dets.iter().any(|d| *d < 0.0);
    let sign_change = pos && neg;
    Ok(RankGridReport {
        kind,
        nodes: grid.to_vec(),
        values,
        rows,
        cols,
        min_value: min.0,
        argmin: min.1,
        max_value: max,
        sign_change,
        failed_nodes,
        threshold: RANK_THRESHOLD,
        holds: min.0 > RANK_THRESHOLD && !sign_change,
    })
}

/// `sigma_min[G(theta)]` at each node of a just-identified model.
pub fn rank_grid_just_identified<M: MomentModel + ?Sized>(
    model: &M,
    grid: &[Vector],
) -> Result<RankGridReport> {
    if model.moment_dim() != model.param_dim() {
        return Err(Error::invalid(format!(
            "just-identified grid needs m = d, got m = {}, d = {}",
            model.moment_dim(),
            model.param_dim()
        )));
    }
    let jac = jacobians(model, grid)?;
    let failed: Vec<usize> = (0..grid.len()).filter(|&i| jac[i].is_none()).collect();
    let (values, dets): (Vec<f64>, Vec<f64>) = jac
        .iter()
        .map(|j| match j {
            Some(g) => (
                min_singular_value(g).unwrap_or(f64::NAN),
                g.determinant(),
            ),
            None => (f64::NAN, f64::NAN),
        })
        .unzip();
    assemble(RankGridKind::JustIdentified, grid, values, dets, grid.len(), 1, failed)
}

/// `sigma_min[G(theta_i)' W G(theta_j)]` over all ordered pairs of nodes.
pub fn rank_grid_over_identified<M: MomentModel + ?Sized>(
    model: &M,
    w: &Weighting,
    grid: &[Vector],
) -> Result<RankGridReport> {
    if w.dim() != model.moment_dim() {
        return Err(Error::invalid("weighting dimension does not match the model"));
    }
    let jac = jacobians(model, grid)?;
    let failed: Vec<usize> = (0..grid.len()).filter(|&i| jac[i].is_none()).collect();
    let left: Vec<Option<Matrix>> = jac.iter().map(|j| j.as_ref().map(|g| g.transpose())).collect();
    let right: Vec<Option<Matrix>> = jac.iter().map(|j| j.as_ref().map(|g| w.matrix() * g)).collect();
    let n = grid.len();
    let (values, dets): (Vec<f64>, Vec<f64>) = (0..n * n)
        .into_par_iter()
        .map(|k| match (&left[k / n], &right[k % n]) {
            (Some(a), Some(b)) => {
                let m = a * b;
                (min_singular_value(&m).unwrap_or(f64::NAN), m.determinant())
            }
            _ => (f64::NAN, f64::NAN),
        })
        .unzip();
    assemble(RankGridKind::OverIdentified, grid, values, dets, n, n, failed)
}
