#![allow(dead_code)]

use chronopref::{
    Action, BenefitTiming, ConsumptionProblem, DiscountFunction, TaskProblem, UtilityFunction,
};

pub const DELTAS: [f64; 5] = [0.3, 0.5, 0.7, 0.9, 0.99];

pub fn exponentials() -> Vec<DiscountFunction> {
    DELTAS
        .iter()
        .map(|&d| DiscountFunction::exponential(d).unwrap())
        .collect()
}

pub fn consumption_sweep() -> Vec<ConsumptionProblem> {
    let mut out = Vec::new();
    for horizon in 1..=5 {
        for endowment in 0..=4 {
            for utility in [UtilityFunction::Linear, UtilityFunction::Log] {
                out.push(ConsumptionProblem::new(horizon, endowment, utility).unwrap());
            }
        }
    }
    out
}

pub fn task_sweep() -> Vec<TaskProblem> {
    let mut out = Vec::new();
    for deadline in 1..=5 {
        for cost in [1.0, 4.0, 16.0] {
            for benefit in [2.0, 5.0, 30.0] {
                for timing in [
                    BenefitTiming::AtDeadline,
                    BenefitTiming::AfterAction { lag: 1 },
                    BenefitTiming::AfterAction { lag: 2 },
                ] {
                    out.push(TaskProblem::new(deadline, cost, benefit, timing).unwrap());
                }
            }
        }
    }
    out
}

/// Weight of delay `d` written out by hand, without going through the crate.
pub fn oracle_weight(f: &DiscountFunction, d: u32) -> f64 {
    match f {
        DiscountFunction::Exponential { delta } => delta.powi(d as i32),
        DiscountFunction::Hyperbolic => 1.0 / (1.0 + d as f64),
        DiscountFunction::ShiftedHyperbolic { m } => 1.0 / (1.0 + d as f64 + *m as f64),
        DiscountFunction::Tabulated { weights } => weights[d as usize],
    }
}

pub fn oracle_utility(u: &UtilityFunction, r: u32) -> f64 {
    let r = r as f64;
    match u {
        UtilityFunction::Linear => r,
        UtilityFunction::Log => (1.0 + r).ln(),
        UtilityFunction::Power { exponent } => r.powf(*exponent),
    }
}

/// Same tie rule the planners document: a candidate replaces the incumbent
/// only if it is better by more than 1e-12 relative.
pub fn beats(a: f64, b: f64) -> bool {
    a - b > 1e-12 * a.abs().max(b.abs())
}

/// Every allocation of at most `remaining` units over `periods` periods,
/// larger first-period amounts first.
pub fn allocations(periods: usize, remaining: u32) -> Vec<Vec<u32>> {
    if periods == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in (0..=remaining).rev() {
        for mut rest in allocations(periods - 1, remaining - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Brute-force best completion of a consumption problem from `vantage`.
pub fn enumerate_consumption(
    p: &ConsumptionProblem,
    f: &DiscountFunction,
    vantage: u32,
    remaining: u32,
) -> (Vec<Action>, f64) {
    let mut best: Option<(Vec<u32>, f64)> = None;
    for plan in allocations((p.horizon - vantage) as usize, remaining) {
        let mut value = 0.0;
        for (i, &r) in plan.iter().enumerate() {
            value += oracle_weight(f, i as u32) * oracle_utility(&p.utility, r);
        }
        if best.as_ref().is_none_or(|(_, v)| beats(value, *v)) {
            best = Some((plan, value));
        }
    }
    let (plan, value) = best.unwrap();
    (plan.into_iter().map(Action::Consume).collect(), value)
}

/// Brute-force best completion of a pending task from `vantage`: act at one
/// of the remaining periods (earliest listed first) or never.
pub fn enumerate_task(p: &TaskProblem, f: &DiscountFunction, vantage: u32) -> (Vec<Action>, f64) {
    let periods = (p.deadline - vantage) as usize;
    let mut best: Option<(Option<usize>, f64)> = None;
    let candidates = (0..periods).map(Some).chain(std::iter::once(None));
    for act in candidates {
        let value = match act {
            Some(i) => {
                let t = vantage + i as u32;
                let benefit_at = match p.benefit_timing {
                    BenefitTiming::AtDeadline => p.deadline,
                    BenefitTiming::AfterAction { lag } => t + lag,
                };
                let mut v = 0.0;
                v += oracle_weight(f, t - vantage) * -p.cost;
                v += oracle_weight(f, benefit_at - vantage) * p.benefit;
                v
            }
            None => 0.0,
        };
        if best.as_ref().is_none_or(|(_, v)| beats(value, *v)) {
            best = Some((act, value));
        }
    }
    let (act, value) = best.unwrap();
    let plan = (0..periods)
        .map(|i| {
            if Some(i) == act {
                Action::Act
            } else {
                Action::Wait
            }
        })
        .collect();
    (plan, value)
}
