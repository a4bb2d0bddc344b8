use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::numerics::Vector;

/// How the conditioning system behaved at one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditioningStatus {
    /// Starting point, no step taken.
    Initial,
    Ok,
    /// Newton step through an indefinite Hessian.
    Indefinite,
    /// BFGS curvature condition failed; previous approximation kept.
    UpdateSkipped,
    /// Local step failed and the global candidate was used.
    LocalFailed,
}

impl fmt::Display for ConditioningStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConditioningStatus::Initial => "initial",
            ConditioningStatus::Ok => "ok",
            ConditioningStatus::Indefinite => "indefinite",
            ConditioningStatus::UpdateSkipped => "update_skipped",
            ConditioningStatus::LocalFailed => "local_failed",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub theta: Vector,
    pub q: f64,
    pub step_norm: f64,
    pub grad_norm: f64,
    pub status: ConditioningStatus,
    pub global_accepted: bool,
    pub in_bounds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceReason {
    GradTol,
    StepTol,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged(ConvergenceReason),
    MaxIter,
    /// The conditioning matrix was singular (or indefinite where that is refused).
    StepFailure { lambda_min: f64, lambda_max: f64 },
    /// The model could not be evaluated at iteration `k`.
    EvaluationError { k: usize, reason: String },
}

impl Termination {
    pub fn is_converged(&self) -> bool {
        matches!(self, Termination::Converged(_))
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::Converged(ConvergenceReason::GradTol) => write!(f, "converged (gradient tolerance)"),
            Termination::Converged(ConvergenceReason::StepTol) => write!(f, "converged (step tolerance)"),
            Termination::MaxIter => write!(f, "maximum iterations reached"),
            Termination::StepFailure { lambda_min, lambda_max } => write!(
                f,
                "step failure: singular conditioning (lambda_min = {lambda_min:e}, lambda_max = {lambda_max:e})"
            ),
            Termination::EvaluationError { k, reason } => {
                write!(f, "evaluation error at iteration {k}: {reason}")
            }
        }
    }
}

/// Append-only record of one optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    records: Vec<IterationRecord>,
    termination: Termination,
    left_bounds: bool,
}

impl IterationTrace {
    pub(crate) fn new() -> Self {
        Self {
            records: Vec::new(),
            termination: Termination::MaxIter,
            left_bounds: false,
        }
    }

    pub(crate) fn push(&mut self, record: IterationRecord) {
        debug_assert!(self.records.last().map_or(record.k == 0, |r| r.k + 1 == record.k));
        self.left_bounds |= !record.in_bounds;
        self.records.push(record);
    }

    pub(crate) fn finish(mut self, termination: Termination) -> Self {
        self.termination = termination;
        self
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    pub fn termination(&self) -> &Termination {
        &self.termination
    }

    /// Some iterate fell outside the parameter box.
    pub fn left_bounds(&self) -> bool {
        self.left_bounds
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    /// Last evaluated iterate.
    pub fn final_theta(&self) -> Option<&Vector> {
        self.records.last().map(|r| &r.theta)
    }

    /// Iterations taken (records minus the starting point).
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn thetas(&self) -> Vec<Vector> {
        self.records.iter().map(|r| r.theta.clone()).collect()
    }

    pub fn objective_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.q).collect()
    }

    /// CSV with columns `k,theta_1..theta_d,Q,step_norm,grad_norm,status,global_accepted`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let d = self.records.first().map_or(0, |r| r.theta.len());
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["k".to_string()];
        header.extend((1..=d).map(|i| format!("theta_{i}")));
        header.extend(["Q", "step_norm", "grad_norm", "status", "global_accepted"].map(String::from));
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![r.k.to_string()];
            row.extend(r.theta.iter().map(|x| x.to_string()));
            row.push(r.q.to_string());
            row.push(r.step_norm.to_string());
            row.push(r.grad_norm.to_string());
            row.push(r.status.to_string());
            row.push(r.global_accepted.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}
