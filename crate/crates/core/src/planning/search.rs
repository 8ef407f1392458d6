//! Optimal plans from a single vantage by dynamic programming over
//! `(period, state)`.

use serde::{Deserialize, Serialize};

use crate::discounting::Weighting;
use crate::error::{Error, Result};
use crate::problems::{plan_value, strictly_greater, Action, SequentialProblem};

/// A plan for periods `vantage..T` and its value from `vantage`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub vantage: u32,
    pub actions: Vec<Action>,
    pub value: f64,
}

/// Replays `prefix` from the initial state and returns the state it leaves.
pub(crate) fn state_after<P: SequentialProblem + ?Sized>(
    problem: &P,
    prefix: &[Action],
) -> Result<u32> {
    if prefix.len() > problem.horizon() as usize {
        return Err(Error::InfeasiblePlan(format!(
            "prefix has {} periods, problem has {}",
            prefix.len(),
            problem.horizon()
        )));
    }
    let mut state = problem.initial_state();
    for (period, &action) in prefix.iter().enumerate() {
        state = problem.step(period as u32, state, action)?;
    }
    Ok(state)
}

/// Discounted value from `vantage` of the flows produced by `action`.
pub(crate) fn immediate_value<P, W>(
    problem: &P,
    f: &W,
    vantage: u32,
    period: u32,
    state: u32,
    action: Action,
) -> Result<f64>
where
    P: SequentialProblem + ?Sized,
    W: Weighting + ?Sized,
{
    let mut total = 0.0;
    for flow in problem.flows(period, state, action) {
        let delay = flow.at.checked_sub(vantage).ok_or_else(|| {
            Error::InvalidProblem(format!("flow at {} precedes vantage {vantage}", flow.at))
        })?;
        total += f.weight(delay)? * flow.utility;
    }
    Ok(total)
}

/// Value from `vantage` of playing `suffix` starting at `(start, state)`.
pub(crate) fn suffix_value<P, W>(
    problem: &P,
    f: &W,
    vantage: u32,
    start: u32,
    mut state: u32,
    suffix: &[Action],
) -> Result<f64>
where
    P: SequentialProblem + ?Sized,
    W: Weighting + ?Sized,
{
    let mut total = 0.0;
    for (period, &action) in (start..).zip(suffix) {
        let next = problem.step(period, state, action)?;
        total += immediate_value(problem, f, vantage, period, state, action)?;
        state = next;
    }
    Ok(total)
}

/// The feasible completion of `committed_prefix` that maximises
/// [`plan_value`] from `vantage`, where `vantage == committed_prefix.len()`.
///
/// Among equally valued completions the one whose first differing action
/// comes earliest in [`SequentialProblem::actions`] order is returned.
pub fn optimal_plan<P, W>(
    problem: &P,
    f: &W,
    vantage: u32,
    committed_prefix: &[Action],
) -> Result<Plan>
where
    P: SequentialProblem + ?Sized,
    W: Weighting + ?Sized,
{
    let horizon = problem.horizon();
    if vantage >= horizon {
        return Err(Error::InfeasiblePlan(format!(
            "vantage {vantage} is beyond the last period {}",
            horizon.saturating_sub(1)
        )));
    }
    if committed_prefix.len() != vantage as usize {
        return Err(Error::InfeasiblePlan(format!(
            "prefix covers {} periods but the vantage is {vantage}",
            committed_prefix.len()
        )));
    }
    let start_state = state_after(problem, committed_prefix)?;
    let states = problem.max_state() as usize + 1;

    // best[period - vantage][state]: value from `vantage` of the best
    // continuation starting at (period, state)
    let periods = (horizon - vantage) as usize;
    let mut best = vec![vec![0.0; states]; periods + 1];
    for offset in (0..periods).rev() {
        let period = vantage + offset as u32;
        for state in 0..states {
            let mut incumbent: Option<f64> = None;
            for action in problem.actions(period, state as u32) {
                let next = problem.step(period, state as u32, action)?;
                let value = immediate_value(problem, f, vantage, period, state as u32, action)?
                    + best[offset + 1][next as usize];
                if incumbent.is_none_or(|v| strictly_greater(value, v)) {
                    incumbent = Some(value);
                }
            }
            best[offset][state] = incumbent.unwrap_or(0.0);
        }
    }

    let mut actions = Vec::with_capacity(periods);
    let mut state = start_state;
    for offset in 0..periods {
        let period = vantage + offset as u32;
        let mut chosen: Option<(Action, f64)> = None;
        for action in problem.actions(period, state) {
            let next = problem.step(period, state, action)?;
            let value = immediate_value(problem, f, vantage, period, state, action)?
                + best[offset + 1][next as usize];
            if chosen.is_none_or(|(_, v)| strictly_greater(value, v)) {
                chosen = Some((action, value));
            }
        }
        let (action, _) = chosen.ok_or_else(|| {
            Error::InvalidProblem(format!(
                "no feasible action at period {period}, state {state}"
            ))
        })?;
        state = problem.step(period, state, action)?;
        actions.push(action);
    }

    let mut full = committed_prefix.to_vec();
    full.extend_from_slice(&actions);
    let value = plan_value(&full, problem, f, vantage)?;
    Ok(Plan {
        vantage,
        actions,
        value,
    })
}
