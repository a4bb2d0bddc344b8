use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{full_hessian, HessianConvention, MomentModel, Weighting};
use crate::numerics::{sym_eigenvalues, Vector};

/// Smallest Hessian eigenvalue at each grid node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityMap {
    #[serde(skip)]
    pub nodes: Vec<Vector>,
    /// `NaN` where the Hessian could not be evaluated.
    #[serde(skip)]
    pub lambda_min: Vec<f64>,
    pub convention: HessianConvention,
    pub min: f64,
    pub max: f64,
    pub failed_nodes: Vec<usize>,
}

impl ConvexityMap {
    /// Both signs occur, so the objective is not convex on the grid's hull.
    pub fn is_non_convex(&self) -> bool {
        self.min < 0.0 && self.max > 0.0
    }

    /// `theta_1..theta_d,lambda_min`
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let d = self.nodes.first().map_or(0, |n| n.len());
        let mut header: Vec<String> = (1..=d).map(|i| format!("theta_{i}")).collect();
        header.push("lambda_min".into());
        w.write_record(&header)?;
        for (node, l) in self.nodes.iter().zip(&self.lambda_min) {
            let mut row: Vec<String> = node.iter().map(|x| x.to_string()).collect();
            row.push(l.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `lambda_min` of the Hessian of `Q` (`Half`) or of `g'Wg` (`Double`) at each node.
pub fn convexity_map<M: MomentModel + ?Sized>(
    model: &M,
    w: &Weighting,
    grid: &[Vector],
    convention: HessianConvention,
) -> Result<ConvexityMap> {
    if grid.is_empty() {
        return Err(Error::invalid("convexity map needs at least one node"));
    }
    let lambda_min: Vec<f64> = grid
        .par_iter()
        .map(|t| {
            full_hessian(model, w, t)
                .and_then(|h| sym_eigenvalues(&(h * convention.factor())))
                .map(|e| e.min())
                .unwrap_or(f64::NAN)
        })
        .collect();
    let failed_nodes: Vec<usize> = (0..grid.len()).filter(|&i| lambda_min[i].is_nan()).collect();
    if failed_nodes.len() == grid.len() {
        return Err(Error::AllFailed { attempted: grid.len() });
    }
    let valid = lambda_min.iter().filter(|v| !v.is_nan());
    let min = valid.clone().copied().fold(f64::INFINITY, f64::min);
    let max = valid.copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ConvexityMap {
        nodes: grid.to_vec(),
        lambda_min,
        convention,
        min,
        max,
        failed_nodes,
    })
}
