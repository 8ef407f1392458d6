use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{Action, Flow, SequentialProblem};

use super::search::state_after;

/// A problem in which every period whose action departs from a reference
/// plan costs `penalty` utility units, charged in that period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Penalized<P> {
    pub inner: P,
    pub reference: Vec<Action>,
    pub penalty: f64,
}

/// Wraps `problem` with a deviation penalty relative to `reference_plan`.
///
/// A zero penalty leaves every plan's value unchanged. A penalty above
/// [`SequentialProblem::utility_span`] makes compliance strictly better than
/// any deviation for every self.
pub fn apply_commitment_penalty<P: SequentialProblem>(
    problem: P,
    reference_plan: Vec<Action>,
    penalty: f64,
) -> Result<Penalized<P>> {
    if !(penalty.is_finite() && penalty >= 0.0) {
        return Err(Error::InvalidPenalty(penalty));
    }
    if reference_plan.len() != problem.horizon() as usize {
        return Err(Error::InfeasiblePlan(format!(
            "reference plan has {} periods, problem has {}",
            reference_plan.len(),
            problem.horizon()
        )));
    }
    state_after(&problem, &reference_plan)?;
    Ok(Penalized {
        inner: problem,
        reference: reference_plan,
        penalty,
    })
}

impl<P: SequentialProblem> SequentialProblem for Penalized<P> {
    fn horizon(&self) -> u32 {
        self.inner.horizon()
    }

    fn initial_state(&self) -> u32 {
        self.inner.initial_state()
    }

    fn max_state(&self) -> u32 {
        self.inner.max_state()
    }

    fn actions(&self, period: u32, state: u32) -> Vec<Action> {
        self.inner.actions(period, state)
    }

    fn step(&self, period: u32, state: u32, action: Action) -> Result<u32> {
        self.inner.step(period, state, action)
    }

    fn flows(&self, period: u32, state: u32, action: Action) -> Vec<Flow> {
        let mut flows = self.inner.flows(period, state, action);
        if self.penalty > 0.0 && self.reference.get(period as usize) != Some(&action) {
            flows.push(Flow {
                at: period,
                utility: -self.penalty,
            });
        }
        flows
    }

    fn last_flow_period(&self) -> u32 {
        self.inner.last_flow_period()
    }

    fn validate(&self) -> Result<()> {
        self.inner.validate()?;
        if !(self.penalty.is_finite() && self.penalty >= 0.0) {
            return Err(Error::InvalidPenalty(self.penalty));
        }
        state_after(&self.inner, &self.reference).map(|_| ())
    }

    fn utility_span(&self) -> f64 {
        self.inner.utility_span() + f64::from(self.horizon()) * self.penalty
    }
}
