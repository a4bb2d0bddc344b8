use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::eval;
use crate::error::{Error, Result};
use crate::numerics::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemperatureRule {
    /// `T_l = T1 / ln(l)`
    #[default]
    Logarithmic,
    /// `T_l = T1 * 0.95^l`
    Geometric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealingSchedule {
    pub t1: f64,
    pub rule: TemperatureRule,
    /// Total number of points `k`, the start included.
    pub iterations: usize,
    pub seed: u64,
}

impl AnnealingSchedule {
    pub fn new(t1: f64, iterations: usize, seed: u64) -> Self {
        Self {
            t1,
            rule: TemperatureRule::Logarithmic,
            iterations,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t1 > 0.0) || !self.t1.is_finite() {
            return Err(Error::Config(format!("T1 must be positive, got {}", self.t1)));
        }
        if self.iterations < 2 {
            return Err(Error::Config("annealing needs at least 2 iterations".into()));
        }
        Ok(())
    }

    /// Temperature at step `l >= 2`.
    pub fn temperature(&self, l: usize) -> f64 {
        match self.rule {
            TemperatureRule::Logarithmic => self.t1 / (l as f64).ln(),
            TemperatureRule::Geometric => self.t1 * 0.95f64.powi(l as i32),
        }
    }

    /// Proposal variance `eta_l`, equal to the temperature.
    pub fn proposal_variance(&self, l: usize) -> f64 {
        self.temperature(l)
    }
}

/// Metropolis rule: accept when `u <= exp(-delta / T)`. Improvements
/// (`delta <= 0`) are accepted for every `u`.
pub fn accept(delta: f64, temperature: f64, u: f64) -> bool {
    delta <= 0.0 || u <= (-delta / temperature).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnealingRecord {
    pub l: usize,
    pub proposal: Vec<f64>,
    pub proposal_value: Option<f64>,
    pub accepted: bool,
    pub temperature: f64,
    pub current_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealingResult {
    pub best: Vector,
    pub value: f64,
    pub current: Vector,
    pub rejections: usize,
    /// Proposals where `f` failed; counted as rejections too.
    pub failures: usize,
    pub trace: Vec<AnnealingRecord>,
}

/// Random-walk Metropolis with a decreasing temperature; returns the best
/// point among all visited states.
pub fn simulated_annealing<F: Fn(&Vector) -> Result<f64>>(
    f: F,
    theta1: &Vector,
    schedule: &AnnealingSchedule,
) -> Result<AnnealingResult> {
    schedule.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let mut current = theta1.clone();
    let mut q = eval(&f, theta1)?;
    let mut best = (current.clone(), q);
    let mut rejections = 0;
    let mut failures = 0;
    let mut trace = Vec::with_capacity(schedule.iterations - 1);
    for l in 2..=schedule.iterations {
        let t = schedule.temperature(l);
        let sd = schedule.proposal_variance(l).sqrt();
        let proposal = current.map(|x| x + sd * rng.sample::<f64, _>(StandardNormal));
        let u: f64 = rng.gen();
        let value = eval(&f, &proposal).ok();
        let accepted = match value {
            Some(qs) => accept(qs - q, t, u),
            None => {
                failures += 1;
                false
            }
        };
        if accepted {
            current = proposal.clone();
            q = value.expect("accepted proposals have a value");
            if q < best.1 {
                best = (current.clone(), q);
            }
        } else {
            rejections += 1;
        }
        trace.push(AnnealingRecord {
            l,
            proposal: proposal.as_slice().to_vec(),
            proposal_value: value,
            accepted,
            temperature: t,
            current_value: q,
        });
    }
    Ok(AnnealingResult {
        best: best.0,
        value: best.1,
        current,
        rejections,
        failures,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acceptance_rule() {
        assert!(accept(0.0, 1.0, 1.0));
        assert!(accept(-5.0, 1e-9, 1.0));
        assert!(!accept(1.0, 1.0, 0.9));
        assert!(accept(1.0, 1.0, 0.3));
    }

    #[test]
    fn schedules_decrease() {
        let mut s = AnnealingSchedule::new(2.0, 100, 0);
        for rule in [TemperatureRule::Logarithmic, TemperatureRule::Geometric] {
            s.rule = rule;
            for l in 2..100 {
                assert!(s.temperature(l + 1) <= s.temperature(l));
                assert!(s.proposal_variance(l) > 0.0);
            }
        }
        assert!(AnnealingSchedule::new(0.0, 10, 0).validate().is_err());
    }

    #[test]
    fn quadratic_reaches_minimum() {
        let f = |t: &Vector| Ok(t[0] * t[0]);
        let theta1 = Vector::from_element(1, 2.0);
        for seed in 0..20 {
            let r = simulated_annealing(f, &theta1, &AnnealingSchedule::new(1.0, 5000, seed)).unwrap();
            assert!(r.value <= 4.0);
            assert!(r.value < 0.05, "seed {seed}: {}", r.value);
        }
    }

    #[test]
    fn failures_are_rejections() {
        let f = |t: &Vector| {
            if t[0] > 0.0 {
                Err(Error::Domain("positive".into()))
            } else {
                Ok(t[0] * t[0])
            }
        };
        let r = simulated_annealing(f, &Vector::from_element(1, -1.0), &AnnealingSchedule::new(1.0, 500, 3)).unwrap();
        assert!(r.failures > 0);
        assert!(r.rejections >= r.failures);
        assert!(r.best[0] <= 0.0);
    }
}
