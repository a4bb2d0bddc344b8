//! Derivative-free comparison algorithms: Nelder-Mead, grid search,
//! simulated annealing and multi-start.

mod annealing;
mod grid;
mod multi_start;
mod nelder_mead;

pub use annealing::{
    accept, simulated_annealing, AnnealingRecord, AnnealingResult, AnnealingSchedule,
    TemperatureRule,
};
pub use grid::{grid_search, refined_grid_search, required_grid_points, uniform_grid, GridResult};
pub use multi_start::{gmm_multi_start, multi_start, MultiStartReport, StartOutcome, StartResult};
pub use nelder_mead::{
    contract, expand, nelder_mead, reduce, reflect, NelderMeadConfig, NelderMeadResult, NmMove,
    NmRecord, Simplex,
};

use crate::error::{Error, Result};
use crate::numerics::Vector;

/// Evaluates `f` and turns non-finite values into evaluation errors.
pub(crate) fn eval<F: Fn(&Vector) -> Result<f64> + ?Sized>(f: &F, theta: &Vector) -> Result<f64> {
    let v = f(theta)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::evaluation(theta.as_slice(), format!("objective is {v}")))
    }
}
