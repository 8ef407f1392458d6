//! Agents as successions of selves.
//!
//! Each period is decided by a separate self that discounts from its own
//! vantage. The agent kinds differ only in how a self treats its successors:
//!
//! - **Naive** re-optimises every period as if later selves will follow the
//!   current plan, executes the first step and discards the rest.
//! - **Sophisticated** solves the game between selves by backward induction
//!   over `(period, state)`: the last self acts myopically and every earlier
//!   self best-responds to its successors' fixed policies.
//! - **Committed** fixes the period-0 optimum and executes it verbatim.
//! - **SelfModifying** behaves naively (or sophisticatedly) until period `k`,
//!   then rewrites its discounting so that a self at `s >= k` weighs a reward
//!   at calendar period `t` by `weight(t - k)`, the period-`k` weight.

mod commitment;
mod search;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::discounting::{DiscountFunction, DiscountInForce};
use crate::error::{Error, Result};
use crate::problems::{plan_value, strictly_greater, Action, SequentialProblem};

pub use commitment::{apply_commitment_penalty, Penalized};
pub use search::{optimal_plan, Plan};

use search::{immediate_value, suffix_value};

/// How a self-modifying agent behaves before it modifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PreModification {
    #[default]
    Naive,
    Sophisticated,
}

impl fmt::Display for PreModification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PreModification::Naive => "naive",
            PreModification::Sophisticated => "sophisticated",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AgentKind {
    Naive,
    Sophisticated,
    Committed,
    SelfModifying {
        modify_at: u32,
        #[serde(default)]
        before: PreModification,
    },
}

impl AgentKind {
    pub fn self_modifying(modify_at: u32) -> Self {
        AgentKind::SelfModifying {
            modify_at,
            before: PreModification::Naive,
        }
    }

    /// The four kinds in report order, with self-modification at period 0.
    pub fn all() -> [AgentKind; 4] {
        [
            AgentKind::Naive,
            AgentKind::Sophisticated,
            AgentKind::Committed,
            AgentKind::self_modifying(0),
        ]
    }

    pub fn label(&self) -> &'static str {
        match self {
            AgentKind::Naive => "naive",
            AgentKind::Sophisticated => "sophisticated",
            AgentKind::Committed => "committed",
            AgentKind::SelfModifying { .. } => "self-modifying",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentKind::SelfModifying { modify_at, before } => {
                write!(f, "self-modifying(k={modify_at}, before={before})")
            }
            other => f.write_str(other.label()),
        }
    }
}

/// Realized path of an agent plus what each self thought along the way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub kind: AgentKind,
    /// Executed action per period.
    pub actions: Vec<Action>,
    /// Plan for periods `s..T` the self at `s` intended (naive, committed,
    /// modified selves) or anticipated from its successors (sophisticated).
    pub intended_plans: Vec<Vec<Action>>,
    /// The acting self's value of its intended plan, under its own discounting.
    pub evaluations: Vec<f64>,
    /// Value of the realized stream from each vantage under the original
    /// discount function.
    pub realized_value_from: Vec<f64>,
    /// Discounting in force for the self at each period.
    pub discount_used: Vec<DiscountInForce>,
}

impl Trajectory {
    /// Same executed actions, ignoring bookkeeping.
    pub fn same_path(&self, other: &Trajectory) -> bool {
        self.actions == other.actions
    }

    /// Periods at which a naive self's intended action for a later period was
    /// not what the later self actually did.
    pub fn broken_intentions(&self) -> Vec<u32> {
        let mut periods = Vec::new();
        for (s, plan) in self.intended_plans.iter().enumerate() {
            let kept = plan
                .iter()
                .zip(&self.actions[s..])
                .all(|(intended, done)| intended == done);
            if !kept {
                periods.push(s as u32);
            }
        }
        periods
    }
}

/// Discounting each period's self applies.
struct Schedule {
    base: DiscountFunction,
    modify_at: Option<u32>,
}

impl Schedule {
    fn at(&self, period: u32) -> DiscountInForce {
        match self.modify_at {
            Some(k) if period >= k => DiscountInForce::shifted(self.base.clone(), period - k),
            _ => DiscountInForce::original(self.base.clone()),
        }
    }
}

/// Simulates `kind` on `problem` under discount function `f`.
pub fn simulate<P>(problem: &P, f: &DiscountFunction, kind: AgentKind) -> Result<Trajectory>
where
    P: SequentialProblem + ?Sized,
{
    problem.validate()?;
    f.validate()?;
    let horizon = problem.horizon();
    let trajectory = match kind {
        AgentKind::Naive => replanning(
            problem,
            &Schedule {
                base: f.clone(),
                modify_at: None,
            },
            kind,
        )?,
        AgentKind::Sophisticated => {
            let schedule = Schedule {
                base: f.clone(),
                modify_at: None,
            };
            SophisticatedSolution::solve(problem, &schedule)?.into_trajectory(problem, f, kind)?
        }
        AgentKind::Committed => committed(problem, f)?,
        AgentKind::SelfModifying { modify_at, before } => {
            if modify_at >= horizon {
                return Err(Error::InvalidAgent(format!(
                    "modify_at {modify_at} must be below the horizon {horizon}"
                )));
            }
            let schedule = Schedule {
                base: f.clone(),
                modify_at: Some(modify_at),
            };
            match before {
                PreModification::Naive => replanning(problem, &schedule, kind)?,
                PreModification::Sophisticated => SophisticatedSolution::solve(problem, &schedule)?
                    .into_trajectory(problem, f, kind)?,
            }
        }
    };
    Ok(trajectory)
}

fn realized_values<P>(problem: &P, f: &DiscountFunction, actions: &[Action]) -> Result<Vec<f64>>
where
    P: SequentialProblem + ?Sized,
{
    (0..problem.horizon())
        .map(|s| plan_value(actions, problem, f, s))
        .collect()
}

fn replanning<P>(problem: &P, schedule: &Schedule, kind: AgentKind) -> Result<Trajectory>
where
    P: SequentialProblem + ?Sized,
{
    let horizon = problem.horizon();
    let mut actions = Vec::with_capacity(horizon as usize);
    let mut intended_plans = Vec::with_capacity(horizon as usize);
    let mut evaluations = Vec::with_capacity(horizon as usize);
    let mut discount_used = Vec::with_capacity(horizon as usize);
    for s in 0..horizon {
        let discount = schedule.at(s);
        let plan = optimal_plan(problem, &discount, s, &actions)?;
        actions.push(plan.actions[0]);
        evaluations.push(plan.value);
        intended_plans.push(plan.actions);
        discount_used.push(discount);
    }
    let realized_value_from = realized_values(problem, &schedule.base, &actions)?;
    Ok(Trajectory {
        kind,
        actions,
        intended_plans,
        evaluations,
        realized_value_from,
        discount_used,
    })
}

fn committed<P>(problem: &P, f: &DiscountFunction) -> Result<Trajectory>
where
    P: SequentialProblem + ?Sized,
{
    let plan = optimal_plan(problem, f, 0, &[])?;
    let actions = plan.actions;
    let realized_value_from = realized_values(problem, f, &actions)?;
    let horizon = problem.horizon() as usize;
    Ok(Trajectory {
        kind: AgentKind::Committed,
        intended_plans: (0..horizon).map(|s| actions[s..].to_vec()).collect(),
        evaluations: realized_value_from.clone(),
        realized_value_from,
        discount_used: vec![DiscountInForce::original(f.clone()); horizon],
        actions,
    })
}

/// Equilibrium policies of the game between selves, one action per
/// `(period, state)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SophisticatedSolution {
    policy: Vec<Vec<Action>>,
    discounts: Vec<DiscountInForce>,
}

impl SophisticatedSolution {
    /// Backward induction. Self `t` at state `x` picks the first action, in
    /// tie-break order, maximising its own discounted value given that every
    /// later self follows its already-fixed policy.
    fn solve<P>(problem: &P, schedule: &Schedule) -> Result<Self>
    where
        P: SequentialProblem + ?Sized,
    {
        let horizon = problem.horizon();
        let states = problem.max_state() + 1;
        let discounts: Vec<DiscountInForce> = (0..horizon).map(|t| schedule.at(t)).collect();
        let mut solution = SophisticatedSolution {
            policy: vec![Vec::new(); horizon as usize],
            discounts,
        };
        for t in (0..horizon).rev() {
            let discount = &solution.discounts[t as usize];
            let mut row = Vec::with_capacity(states as usize);
            for state in 0..states {
                let mut chosen: Option<(Action, f64)> = None;
                for action in problem.actions(t, state) {
                    let next = problem.step(t, state, action)?;
                    let continuation = solution.play_from(problem, t + 1, next)?;
                    let value = immediate_value(problem, discount, t, t, state, action)?
                        + suffix_value(problem, discount, t, t + 1, next, &continuation)?;
                    if chosen.is_none_or(|(_, v)| strictly_greater(value, v)) {
                        chosen = Some((action, value));
                    }
                }
                let (action, _) = chosen.ok_or_else(|| {
                    Error::InvalidProblem(format!(
                        "no feasible action at period {t}, state {state}"
                    ))
                })?;
                row.push(action);
            }
            solution.policy[t as usize] = row;
        }
        Ok(solution)
    }

    /// Action the self at `period` takes in `state`.
    pub fn policy(&self, period: u32, state: u32) -> Option<Action> {
        self.policy
            .get(period as usize)?
            .get(state as usize)
            .copied()
    }

    /// Path produced from `(period, state)` by following the policies.
    pub fn play_from<P>(&self, problem: &P, period: u32, mut state: u32) -> Result<Vec<Action>>
    where
        P: SequentialProblem + ?Sized,
    {
        let mut path = Vec::new();
        for t in period..problem.horizon() {
            let action = self.policy(t, state).ok_or_else(|| {
                Error::InvalidProblem(format!("no policy for period {t}, state {state}"))
            })?;
            state = problem.step(t, state, action)?;
            path.push(action);
        }
        Ok(path)
    }

    fn into_trajectory<P>(
        self,
        problem: &P,
        f: &DiscountFunction,
        kind: AgentKind,
    ) -> Result<Trajectory>
    where
        P: SequentialProblem + ?Sized,
    {
        let actions = self.play_from(problem, 0, problem.initial_state())?;
        let mut intended_plans = Vec::with_capacity(actions.len());
        let mut evaluations = Vec::with_capacity(actions.len());
        let mut state = problem.initial_state();
        for (s, &action) in actions.iter().enumerate() {
            let s = s as u32;
            let anticipated = self.play_from(problem, s, state)?;
            evaluations.push(suffix_value(
                problem,
                &self.discounts[s as usize],
                s,
                s,
                state,
                &anticipated,
            )?);
            intended_plans.push(anticipated);
            state = problem.step(s, state, action)?;
        }
        let realized_value_from = realized_values(problem, f, &actions)?;
        Ok(Trajectory {
            kind,
            actions,
            intended_plans,
            evaluations,
            realized_value_from,
            discount_used: self.discounts,
        })
    }
}

/// Solves the sophisticated agent and returns its policies, for callers that
/// need to replay subgames.
pub fn sophisticated_solution<P>(problem: &P, f: &DiscountFunction) -> Result<SophisticatedSolution>
where
    P: SequentialProblem + ?Sized,
{
    problem.validate()?;
    f.validate()?;
    SophisticatedSolution::solve(
        problem,
        &Schedule {
            base: f.clone(),
            modify_at: None,
        },
    )
}
