//! Decision problems: dated-reward binary choices, finite-horizon consumption
//! allocation, and the one-shot task problem.
//!
//! Consumption and task problems share the [`SequentialProblem`] interface,
//! which is everything the planners need: a small integer state, the feasible
//! actions in tie-break order, the transition, and the dated utility flows an
//! action produces.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::discounting::{present_value, Weighting};
use crate::error::{Error, Result};

/// Relative margin below which two values are treated as tied.
pub const RELATIVE_MARGIN: f64 = 1e-12;

/// `a` beats `b` by more than the relative margin.
pub fn strictly_greater(a: f64, b: f64) -> bool {
    a - b > RELATIVE_MARGIN * a.abs().max(b.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatedReward {
    pub amount: f64,
    /// Absolute period at which the reward arrives.
    pub at: u32,
}

impl DatedReward {
    pub fn new(amount: f64, at: u32) -> Result<Self> {
        if !amount.is_finite() {
            return Err(Error::NonFiniteAmount(amount));
        }
        Ok(DatedReward { amount, at })
    }
}

/// Present value of `reward` seen from absolute period `now`.
pub fn evaluate_dated<W: Weighting + ?Sized>(reward: &DatedReward, f: &W, now: u32) -> Result<f64> {
    if now > reward.at {
        return Err(Error::RewardInPast { at: reward.at, now });
    }
    present_value(f, reward.amount, reward.at - now)
}

/// Two dated rewards, one of which is picked irrevocably at `decided_at`.
/// Amounts are utility units; no utility function is applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryChoice {
    pub option_a: DatedReward,
    pub option_b: DatedReward,
    pub decided_at: u32,
}

impl BinaryChoice {
    pub fn new(option_a: DatedReward, option_b: DatedReward, decided_at: u32) -> Result<Self> {
        let choice = BinaryChoice {
            option_a,
            option_b,
            decided_at,
        };
        choice.validate()?;
        Ok(choice)
    }

    pub fn validate(&self) -> Result<()> {
        for r in [&self.option_a, &self.option_b] {
            if !r.amount.is_finite() {
                return Err(Error::NonFiniteAmount(r.amount));
            }
            if self.decided_at > r.at {
                return Err(Error::DecisionAfterReward {
                    decided_at: self.decided_at,
                    at: r.at,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Selection {
    A,
    B,
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Selection::A => "A",
            Selection::B => "B",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChoiceOutcome {
    pub vantage: u32,
    pub selection: Selection,
    pub value_a: f64,
    pub value_b: f64,
}

/// Larger value wins; ties go to the earlier date, then to A.
pub(crate) fn select(value_a: f64, value_b: f64, at_a: u32, at_b: u32) -> Selection {
    if strictly_greater(value_a, value_b) {
        Selection::A
    } else if strictly_greater(value_b, value_a) || at_b < at_a {
        Selection::B
    } else {
        Selection::A
    }
}

/// The option preferred from vantage `now`.
///
/// When `now < decided_at` this is the preference of an earlier self, not a
/// binding decision. The strictly larger discounted value wins; ties go to the
/// earlier reward, then to option A.
pub fn choose<W: Weighting + ?Sized>(
    choice: &BinaryChoice,
    f: &W,
    now: u32,
) -> Result<ChoiceOutcome> {
    choice.validate()?;
    if now > choice.decided_at {
        return Err(Error::VantageAfterDecision {
            now,
            decided_at: choice.decided_at,
        });
    }
    let value_a = evaluate_dated(&choice.option_a, f, now)?;
    let value_b = evaluate_dated(&choice.option_b, f, now)?;
    let selection = select(value_a, value_b, choice.option_a.at, choice.option_b.at);
    Ok(ChoiceOutcome {
        vantage: now,
        selection,
        value_a,
        value_b,
    })
}

/// Single-period utility `U(r)`. All variants are strictly increasing with
/// `U(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum UtilityFunction {
    Linear,
    /// `ln(1 + r)`
    Log,
    /// `r^exponent` with `0 < exponent <= 1`
    Power {
        exponent: f64,
    },
}

impl UtilityFunction {
    pub fn validate(&self) -> Result<()> {
        if let UtilityFunction::Power { exponent } = self {
            if !(exponent.is_finite() && *exponent > 0.0 && *exponent <= 1.0) {
                return Err(Error::InvalidUtility(format!(
                    "power exponent must satisfy 0 < exponent <= 1, got {exponent}"
                )));
            }
        }
        Ok(())
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            UtilityFunction::Linear => r,
            UtilityFunction::Log => (1.0 + r).ln(),
            UtilityFunction::Power { exponent } => r.powf(*exponent),
        }
    }
}

/// What a self does in one period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Action {
    /// Consume this many resource units.
    Consume(u32),
    /// Do the task now.
    Act,
    /// Do nothing (task not done this period, or already done).
    Wait,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Consume(r) => write!(f, "consume {r}"),
            Action::Act => f.write_str("act"),
            Action::Wait => f.write_str("wait"),
        }
    }
}

/// Utility received at an absolute period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flow {
    pub at: u32,
    pub utility: f64,
}

/// A finite-horizon problem played one period at a time by successive selves.
///
/// States are small integers in `0..=max_state()`. `actions` lists feasible
/// actions in tie-break order: when two plans are worth the same, the one
/// whose first differing action comes earlier in this list wins.
pub trait SequentialProblem {
    /// Number of decision periods `T`; periods are `0..T`.
    fn horizon(&self) -> u32;
    fn initial_state(&self) -> u32;
    fn max_state(&self) -> u32;
    fn actions(&self, period: u32, state: u32) -> Vec<Action>;
    /// Next state, or an error if `action` is infeasible at `state`.
    fn step(&self, period: u32, state: u32, action: Action) -> Result<u32>;
    /// Dated utility flows caused by taking `action` at `period`.
    fn flows(&self, period: u32, state: u32, action: Action) -> Vec<Flow>;
    /// Latest period at which any flow can land.
    fn last_flow_period(&self) -> u32;
    fn validate(&self) -> Result<()>;

    /// Largest possible swing in undiscounted total utility between any two
    /// plans. Commitment penalties above this always bind.
    fn utility_span(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsumptionProblem {
    pub horizon: u32,
    pub endowment: u32,
    pub utility: UtilityFunction,
}

impl ConsumptionProblem {
    pub fn new(horizon: u32, endowment: u32, utility: UtilityFunction) -> Result<Self> {
        let p = ConsumptionProblem {
            horizon,
            endowment,
            utility,
        };
        p.validate()?;
        Ok(p)
    }
}

impl SequentialProblem for ConsumptionProblem {
    fn horizon(&self) -> u32 {
        self.horizon
    }

    /// Remaining endowment.
    fn initial_state(&self) -> u32 {
        self.endowment
    }

    fn max_state(&self) -> u32 {
        self.endowment
    }

    /// Larger allocations first, so ties favour consuming earlier.
    fn actions(&self, _period: u32, state: u32) -> Vec<Action> {
        (0..=state).rev().map(Action::Consume).collect()
    }

    fn step(&self, period: u32, state: u32, action: Action) -> Result<u32> {
        match action {
            Action::Consume(r) if r <= state => Ok(state - r),
            Action::Consume(r) => Err(Error::InfeasiblePlan(format!(
                "consuming {r} at period {period} exceeds the remaining {state}"
            ))),
            other => Err(Error::InfeasiblePlan(format!(
                "`{other}` is not a consumption action (period {period})"
            ))),
        }
    }

    fn flows(&self, period: u32, _state: u32, action: Action) -> Vec<Flow> {
        match action {
            Action::Consume(r) => vec![Flow {
                at: period,
                utility: self.utility.eval(f64::from(r)),
            }],
            _ => Vec::new(),
        }
    }

    fn last_flow_period(&self) -> u32 {
        self.horizon.saturating_sub(1)
    }

    fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::InvalidProblem(
                "consumption horizon must be at least 1".into(),
            ));
        }
        self.utility.validate()
    }

    fn utility_span(&self) -> f64 {
        f64::from(self.horizon) * self.utility.eval(f64::from(self.endowment))
    }
}

/// When the task's benefit arrives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BenefitTiming {
    /// At the fixed period `T` right after the deadline.
    #[default]
    AtDeadline,
    /// `lag` periods after the period in which the task is done.
    AfterAction { lag: u32 },
}

/// A task that must be done in exactly one period `t < T` or forfeited. Doing
/// it costs `cost` at `t`; the benefit is paid only if it was done.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskProblem {
    pub deadline: u32,
    pub cost: f64,
    pub benefit: f64,
    #[serde(default)]
    pub benefit_timing: BenefitTiming,
}

impl TaskProblem {
    pub fn new(
        deadline: u32,
        cost: f64,
        benefit: f64,
        benefit_timing: BenefitTiming,
    ) -> Result<Self> {
        let p = TaskProblem {
            deadline,
            cost,
            benefit,
            benefit_timing,
        };
        p.validate()?;
        Ok(p)
    }

    fn benefit_period(&self, acted_at: u32) -> u32 {
        match self.benefit_timing {
            BenefitTiming::AtDeadline => self.deadline,
            BenefitTiming::AfterAction { lag } => acted_at + lag,
        }
    }
}

const TASK_PENDING: u32 = 0;
const TASK_DONE: u32 = 1;

impl SequentialProblem for TaskProblem {
    fn horizon(&self) -> u32 {
        self.deadline
    }

    /// 0 while the task is pending, 1 once done.
    fn initial_state(&self) -> u32 {
        TASK_PENDING
    }

    fn max_state(&self) -> u32 {
        TASK_DONE
    }

    fn actions(&self, _period: u32, state: u32) -> Vec<Action> {
        if state == TASK_PENDING {
            vec![Action::Act, Action::Wait]
        } else {
            vec![Action::Wait]
        }
    }

    fn step(&self, period: u32, state: u32, action: Action) -> Result<u32> {
        match (state, action) {
            (TASK_PENDING, Action::Act) => Ok(TASK_DONE),
            (s, Action::Wait) if s <= TASK_DONE => Ok(s),
            (TASK_DONE, Action::Act) => Err(Error::InfeasiblePlan(format!(
                "task acted on again at period {period}"
            ))),
            (_, other) => Err(Error::InfeasiblePlan(format!(
                "`{other}` is not a task action (period {period})"
            ))),
        }
    }

    fn flows(&self, period: u32, state: u32, action: Action) -> Vec<Flow> {
        if state == TASK_PENDING && action == Action::Act {
            vec![
                Flow {
                    at: period,
                    utility: -self.cost,
                },
                Flow {
                    at: self.benefit_period(period),
                    utility: self.benefit,
                },
            ]
        } else {
            Vec::new()
        }
    }

    fn last_flow_period(&self) -> u32 {
        match self.benefit_timing {
            BenefitTiming::AtDeadline => self.deadline,
            BenefitTiming::AfterAction { lag } => self.deadline - 1 + lag,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.deadline < 1 {
            return Err(Error::InvalidProblem(
                "task deadline must be at least 1".into(),
            ));
        }
        if !(self.cost.is_finite() && self.cost > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "task cost must be positive, got {}",
                self.cost
            )));
        }
        if !(self.benefit.is_finite() && self.benefit > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "task benefit must be positive, got {}",
                self.benefit
            )));
        }
        Ok(())
    }

    fn utility_span(&self) -> f64 {
        self.cost + self.benefit
    }
}

/// Discounted value, seen from `vantage`, of the actions a full plan takes in
/// periods `vantage..T`: `sum_t weight(at - vantage) * utility` over their
/// flows. Earlier actions only matter through the state they leave behind.
pub fn plan_value<P, W>(plan: &[Action], problem: &P, f: &W, vantage: u32) -> Result<f64>
where
    P: SequentialProblem + ?Sized,
    W: Weighting + ?Sized,
{
    let horizon = problem.horizon();
    if plan.len() != horizon as usize {
        return Err(Error::InfeasiblePlan(format!(
            "plan has {} periods, problem has {horizon}",
            plan.len()
        )));
    }
    if vantage >= horizon {
        return Err(Error::InfeasiblePlan(format!(
            "vantage {vantage} is beyond the last period {}",
            horizon - 1
        )));
    }
    let mut state = problem.initial_state();
    let mut total = 0.0;
    for (period, &action) in (0..horizon).zip(plan) {
        let next = problem.step(period, state, action)?;
        if period >= vantage {
            for flow in problem.flows(period, state, action) {
                total += f.weight(flow.at - vantage)? * flow.utility;
            }
        }
        state = next;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discounting::DiscountFunction;

    const EPS: f64 = 1e-12;

    fn sixteen_thirty() -> BinaryChoice {
        BinaryChoice::new(
            DatedReward::new(16.0, 1).unwrap(),
            DatedReward::new(30.0, 2).unwrap(),
            1,
        )
        .unwrap()
    }

    #[test]
    fn evaluate_dated_examples() {
        let h = DiscountFunction::Hyperbolic;
        let thirty = DatedReward::new(30.0, 2).unwrap();
        let sixteen = DatedReward::new(16.0, 1).unwrap();
        assert!((evaluate_dated(&thirty, &h, 0).unwrap() - 10.0).abs() < EPS);
        assert!((evaluate_dated(&sixteen, &h, 1).unwrap() - 16.0).abs() < EPS);
        assert_eq!(
            evaluate_dated(&sixteen, &h, 2),
            Err(Error::RewardInPast { at: 1, now: 2 })
        );
    }

    #[test]
    fn choose_flips_between_day_zero_and_day_one() {
        let h = DiscountFunction::Hyperbolic;
        let day0 = choose(&sixteen_thirty(), &h, 0).unwrap();
        assert_eq!(day0.selection, Selection::B);
        assert!((day0.value_a - 8.0).abs() < EPS && (day0.value_b - 10.0).abs() < EPS);
        let day1 = choose(&sixteen_thirty(), &h, 1).unwrap();
        assert_eq!(day1.selection, Selection::A);
        assert!((day1.value_a - 16.0).abs() < EPS && (day1.value_b - 15.0).abs() < EPS);
    }

    #[test]
    fn choose_tie_breaks() {
        let h = DiscountFunction::Hyperbolic;
        let same = BinaryChoice::new(
            DatedReward::new(5.0, 3).unwrap(),
            DatedReward::new(5.0, 3).unwrap(),
            0,
        )
        .unwrap();
        assert_eq!(choose(&same, &h, 0).unwrap().selection, Selection::A);
        // 2 at t=1 vs 3 at t=2 are both worth 1 from t=0; the earlier one wins
        let earlier_b = BinaryChoice::new(
            DatedReward::new(3.0, 2).unwrap(),
            DatedReward::new(2.0, 1).unwrap(),
            0,
        )
        .unwrap();
        assert_eq!(choose(&earlier_b, &h, 0).unwrap().selection, Selection::B);
    }

    #[test]
    fn choose_rejects_late_vantage_and_bad_choices() {
        let h = DiscountFunction::Hyperbolic;
        assert_eq!(
            choose(&sixteen_thirty(), &h, 2),
            Err(Error::VantageAfterDecision {
                now: 2,
                decided_at: 1
            })
        );
        assert!(BinaryChoice::new(
            DatedReward { amount: 1.0, at: 1 },
            DatedReward { amount: 2.0, at: 3 },
            2
        )
        .is_err());
        assert!(DatedReward::new(f64::INFINITY, 0).is_err());
    }

    #[test]
    fn utility_functions() {
        assert_eq!(UtilityFunction::Linear.eval(3.0), 3.0);
        assert!((UtilityFunction::Log.eval(1.0) - 2f64.ln()).abs() < EPS);
        assert!((UtilityFunction::Power { exponent: 0.5 }.eval(4.0) - 2.0).abs() < EPS);
        for u in [
            UtilityFunction::Linear,
            UtilityFunction::Log,
            UtilityFunction::Power { exponent: 0.3 },
        ] {
            assert_eq!(u.eval(0.0), 0.0);
        }
        assert!(UtilityFunction::Power { exponent: 1.5 }.validate().is_err());
        assert!(UtilityFunction::Power { exponent: 0.0 }.validate().is_err());
    }

    #[test]
    fn plan_value_examples() {
        let h = DiscountFunction::Hyperbolic;
        let p = ConsumptionProblem::new(2, 2, UtilityFunction::Linear).unwrap();
        let v = plan_value(&[Action::Consume(1), Action::Consume(1)], &p, &h, 0).unwrap();
        assert!((v - 1.5).abs() < EPS);
        assert_eq!(
            plan_value(&[Action::Consume(0), Action::Consume(0)], &p, &h, 0).unwrap(),
            0.0
        );
        let p3 = ConsumptionProblem::new(3, 4, UtilityFunction::Linear).unwrap();
        let all_now = [Action::Consume(4), Action::Consume(0), Action::Consume(0)];
        assert_eq!(plan_value(&all_now, &p3, &h, 0).unwrap(), 4.0);
        // later vantage only counts later periods
        let v1 = plan_value(&[Action::Consume(1), Action::Consume(1)], &p, &h, 1).unwrap();
        assert_eq!(v1, 1.0);
    }

    #[test]
    fn plan_value_rejects_infeasible_plans() {
        let h = DiscountFunction::Hyperbolic;
        let p = ConsumptionProblem::new(2, 2, UtilityFunction::Linear).unwrap();
        assert!(plan_value(&[Action::Consume(2), Action::Consume(1)], &p, &h, 0).is_err());
        assert!(plan_value(&[Action::Consume(1)], &p, &h, 0).is_err());
        assert!(plan_value(&[Action::Act, Action::Wait], &p, &h, 0).is_err());
        assert!(plan_value(&[Action::Consume(0), Action::Consume(0)], &p, &h, 2).is_err());
        let t = TaskProblem::new(2, 1.0, 2.0, BenefitTiming::AtDeadline).unwrap();
        assert!(plan_value(&[Action::Act, Action::Act], &t, &h, 0).is_err());
    }

    #[test]
    fn task_flows() {
        let h = DiscountFunction::Hyperbolic;
        let t = TaskProblem::new(3, 16.0, 30.0, BenefitTiming::AfterAction { lag: 1 }).unwrap();
        // act at period 2 seen from 0: -16/3 + 30/4
        let v = plan_value(&[Action::Wait, Action::Wait, Action::Act], &t, &h, 0).unwrap();
        assert!((v - (-16.0 / 3.0 + 7.5)).abs() < EPS);
        let fixed = TaskProblem::new(3, 16.0, 30.0, BenefitTiming::AtDeadline).unwrap();
        let v = plan_value(&[Action::Act, Action::Wait, Action::Wait], &fixed, &h, 0).unwrap();
        assert!((v - (-16.0 + 7.5)).abs() < EPS);
        assert_eq!(fixed.last_flow_period(), 3);
        assert_eq!(t.last_flow_period(), 3);
        assert!(TaskProblem::new(0, 1.0, 1.0, BenefitTiming::AtDeadline).is_err());
        assert!(TaskProblem::new(2, 0.0, 1.0, BenefitTiming::AtDeadline).is_err());
        assert!(TaskProblem::new(2, 1.0, -1.0, BenefitTiming::AtDeadline).is_err());
    }
}
