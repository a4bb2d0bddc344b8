use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{objective_value, MomentModel, Weighting};
use crate::numerics::Vector;
use crate::optimizers::{run, OptimizerConfig, Termination};

/// What one start produced.
#[derive(Debug, Clone, PartialEq)]
pub struct StartOutcome {
    pub theta: Vector,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartResult {
    pub start: Vector,
    /// The estimate, or the reason the run crashed.
    pub outcome: std::result::Result<StartOutcome, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiStartReport {
    pub results: Vec<StartResult>,
    /// Index into `results` of the lowest objective value.
    pub best: usize,
    pub crashes: usize,
}

impl MultiStartReport {
    pub fn best(&self) -> &StartOutcome {
        self.results[self.best]
            .outcome
            .as_ref()
            .expect("best index points to a success")
    }

    pub fn successes(&self) -> impl Iterator<Item = &StartOutcome> {
        self.results.iter().filter_map(|r| r.outcome.as_ref().ok())
    }

    /// Coordinate-wise mean of the successful estimates.
    pub fn mean(&self) -> Vector {
        let est: Vec<&Vector> = self.successes().map(|o| &o.theta).collect();
        let mut m = Vector::zeros(est[0].len());
        for e in &est {
            m += *e;
        }
        m / est.len() as f64
    }

    /// Coordinate-wise sample standard deviation of the successful estimates;
    /// zero with a single success.
    pub fn std(&self) -> Vector {
        let mean = self.mean();
        let est: Vec<&Vector> = self.successes().map(|o| &o.theta).collect();
        if est.len() < 2 {
            return Vector::zeros(mean.len());
        }
        let mut ss = Vector::zeros(mean.len());
        for e in &est {
            ss += (*e - &mean).map(|x| x * x);
        }
        (ss / (est.len() - 1) as f64).map(f64::sqrt)
    }
}

/// Runs `inner` from every start in parallel. Errors and non-finite values
/// count as crashes; the best success is the one with the lowest value, ties
/// to the earliest start.
pub fn multi_start<F>(inner: F, starts: &[Vector]) -> Result<MultiStartReport>
where
    F: Fn(&Vector) -> Result<StartOutcome> + Sync,
{
    if starts.is_empty() {
        return Err(Error::invalid("no starting values"));
    }
    let results: Vec<StartResult> = starts
        .par_iter()
        .map(|s| StartResult {
            start: s.clone(),
            outcome: match inner(s) {
                Ok(o) if o.value.is_finite() => Ok(o),
                Ok(o) => Err(format!("non-finite objective {}", o.value)),
                Err(e) => Err(e.to_string()),
            },
        })
        .collect();
    let crashes = results.iter().filter(|r| r.outcome.is_err()).count();
    let best = results
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.outcome.as_ref().ok().map(|o| (i, o.value)))
        .fold(None, |acc: Option<(usize, f64)>, (i, v)| match acc {
            Some((_, bv)) if bv <= v => acc,
            _ => Some((i, v)),
        })
        .ok_or(Error::AllFailed { attempted: starts.len() })?
        .0;
    Ok(MultiStartReport { results, best, crashes })
}

/// [`multi_start`] around the gradient-based optimizers. Runs ending in an
/// evaluation error or a singular step count as crashes.
pub fn gmm_multi_start<M: MomentModel + ?Sized>(
    model: &M,
    w: &Weighting,
    starts: &[Vector],
    cfg: &OptimizerConfig,
) -> Result<MultiStartReport> {
    cfg.validate()?;
    multi_start(
        |s| {
            let trace = run(model, w, s, cfg)?;
            match trace.termination() {
                Termination::EvaluationError { .. } | Termination::StepFailure { .. } => {
                    Err(Error::evaluation(s.as_slice(), trace.termination().to_string()))
                }
                _ => {
                    let theta = trace.final_theta().expect("non-empty trace").clone();
                    let value = objective_value(model, w, &theta)?;
                    Ok(StartOutcome { theta, value })
                }
            }
        },
        starts,
    )
}
