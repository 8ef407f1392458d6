//! Scenario files.
//!
//! A scenario is a single tree of keys, written as TOML (or as JSON, which is
//! how reports embed the resolved scenario). Parsing runs in three stages,
//! each with its own error code: syntax, schema (unknown, missing or
//! mistyped fields), and validation against the engine's invariants.
//!
//! ```toml
//! [discount]
//! family = "hyperbolic"
//!
//! [problem]
//! kind = "binary-choice"
//! decided_at = 1
//! vantages = [0, 1]
//! option_a = { amount = 16, at = 1 }
//! option_b = { amount = 30, at = 2 }
//! ```
//!
//! See the repository README for every section and field.

use chronopref::{
    apply_commitment_penalty, AgentKind, BenefitTiming, BinaryChoice, ClockSegment,
    ConsumptionProblem, DatedReward, DelayClock, DiscountFunction, Itinerary, PreModification,
    TaskProblem, UtilityFunction,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, ErrorCode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub discount: DiscountSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<AgentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commitment: Option<CommitmentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consistency: Option<ConsistencySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reversal: Option<ReversalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relativity: Option<RelativitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Exponential,
    Hyperbolic,
    ShiftedHyperbolic,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscountSpec {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Alternative to `delta`: `delta = 1 / (1 + interest_rate)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interest_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    BinaryChoice,
    Consumption,
    Task,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardSpec {
    pub amount: f64,
    pub at: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UtilityKind {
    Linear,
    Log,
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilitySpec {
    pub kind: UtilityKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimingKind {
    AtDeadline,
    AfterAction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingSpec {
    pub kind: TimingKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lag: Option<u32>,
}

/// Flat on purpose: every kind's fields live side by side and validation
/// rejects the ones a kind does not use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub option_a: Option<RewardSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub option_b: Option<RewardSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decided_at: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vantages: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endowment: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utility: Option<UtilitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deadline: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benefit: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benefit_timing: Option<TimingSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentKindSpec {
    Naive,
    Sophisticated,
    Committed,
    SelfModifying,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub kind: AgentKindSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modify_at: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub before: Option<PreModification>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommitmentSpec {
    pub penalty: f64,
    /// Explicit reference plan, one entry per period: an integer allocation
    /// for consumption problems, `"act"` or `"wait"` for tasks. When absent
    /// the period-0 optimal plan is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Vec<PlanStep>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlanStep {
    Consume(u32),
    Task(TaskStep),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskStep {
    Act,
    Wait,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsistencySpec {
    #[serde(default = "default_consistency_horizon")]
    pub horizon: u32,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_consistency_horizon() -> u32 {
    100
}

fn default_tolerance() -> f64 {
    chronopref::discounting::DEFAULT_CONSISTENCY_TOLERANCE
}

impl Default for ConsistencySpec {
    fn default() -> Self {
        ConsistencySpec {
            horizon: default_consistency_horizon(),
            tolerance: default_tolerance(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReversalSpec {
    /// Explicit amount grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amounts: Option<Vec<f64>>,
    /// Shorthand for the grid `1, 2, ..., max_amount`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_amount: Option<u32>,
    pub delay_bound: u32,
    pub vantage_bound: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSearchSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amounts: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_amount: Option<u32>,
    pub delay_bound: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub option_a: RewardSpec,
    pub option_b: RewardSpec,
    #[serde(default)]
    pub decided_at: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelativitySpec {
    pub home: Vec<ClockSegment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traveler: Option<Vec<ClockSegment>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<ProbeSearchSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_clock: Option<DelayClock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

/// Validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub discount: DiscountFunction,
    pub problem: Option<Problem>,
    pub agent: Option<AgentKind>,
    pub commitment: Option<Commitment>,
    pub consistency: Option<ConsistencySpec>,
    pub reversal: Option<ReversalGrid>,
    pub relativity: Option<Relativity>,
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    BinaryChoice {
        choice: BinaryChoice,
        vantages: Vec<u32>,
    },
    Consumption(ConsumptionProblem),
    Task(TaskProblem),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Commitment {
    pub penalty: f64,
    pub reference: Option<Vec<chronopref::Action>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReversalGrid {
    pub amounts: Vec<f64>,
    pub delay_bound: u32,
    pub vantage_bound: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeGrid {
    pub amounts: Vec<f64>,
    pub delay_bound: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Relativity {
    pub home: Itinerary,
    pub traveler: Option<Itinerary>,
    pub probe: Option<BinaryChoice>,
    pub search: Option<ProbeGrid>,
    pub delay_clock: DelayClock,
}

fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::new(
        ErrorCode::InvalidValue,
        format!("{field}: {}", message.into()),
    )
}

fn missing(field: &str, context: &str) -> CliError {
    CliError::new(
        ErrorCode::MissingField,
        format!("{field}: required for {context}"),
    )
}

fn unused(field: &str, context: &str) -> CliError {
    CliError::new(
        ErrorCode::UnknownField,
        format!("{field}: not a field of {context}"),
    )
}

fn need<T: Copy>(value: Option<T>, field: &str, context: &str) -> Result<T, CliError> {
    value.ok_or_else(|| missing(field, context))
}

fn forbid<T>(value: &Option<T>, field: &str, context: &str) -> Result<(), CliError> {
    match value {
        Some(_) => Err(unused(field, context)),
        None => Ok(()),
    }
}

fn amount_grid(
    amounts: &Option<Vec<f64>>,
    max_amount: Option<u32>,
    section: &str,
) -> Result<Vec<f64>, CliError> {
    let grid = match (amounts, max_amount) {
        (Some(_), Some(_)) => {
            return Err(invalid(
                &format!("{section}.max_amount"),
                "give either `amounts` or `max_amount`, not both",
            ))
        }
        (Some(list), None) => list.clone(),
        (None, Some(max)) => (1..=max).map(f64::from).collect(),
        (None, None) => return Err(missing(&format!("{section}.amounts"), section)),
    };
    if grid.is_empty() {
        return Err(invalid(&format!("{section}.amounts"), "grid is empty"));
    }
    if let Some(bad) = grid.iter().find(|a| !a.is_finite()) {
        return Err(invalid(
            &format!("{section}.amounts"),
            format!("{bad} is not finite"),
        ));
    }
    Ok(grid)
}

fn reward(spec: RewardSpec, field: &str) -> Result<DatedReward, CliError> {
    DatedReward::new(spec.amount, spec.at)
        .map_err(|e| invalid(&format!("{field}.amount"), e.to_string()))
}

impl DiscountSpec {
    fn resolve(&self) -> Result<DiscountFunction, CliError> {
        let ctx = |family: &str| format!("discount family {family}");
        match self.family {
            Family::Exponential => {
                forbid(&self.m, "discount.m", &ctx("exponential"))?;
                forbid(&self.weights, "discount.weights", &ctx("exponential"))?;
                match (self.delta, self.interest_rate) {
                    (Some(delta), None) => DiscountFunction::exponential(delta)
                        .map_err(|e| invalid("discount.delta", e.to_string())),
                    (None, Some(i)) => chronopref::delta_from_interest_rate(i)
                        .map_err(|e| invalid("discount.interest_rate", e.to_string())),
                    (Some(_), Some(_)) => Err(invalid(
                        "discount.interest_rate",
                        "give either `delta` or `interest_rate`, not both",
                    )),
                    (None, None) => Err(missing("discount.delta", &ctx("exponential"))),
                }
            }
            Family::Hyperbolic => {
                forbid(&self.delta, "discount.delta", &ctx("hyperbolic"))?;
                forbid(
                    &self.interest_rate,
                    "discount.interest_rate",
                    &ctx("hyperbolic"),
                )?;
                forbid(&self.m, "discount.m", &ctx("hyperbolic"))?;
                forbid(&self.weights, "discount.weights", &ctx("hyperbolic"))?;
                Ok(DiscountFunction::Hyperbolic)
            }
            Family::ShiftedHyperbolic => {
                forbid(&self.delta, "discount.delta", &ctx("shifted-hyperbolic"))?;
                forbid(
                    &self.interest_rate,
                    "discount.interest_rate",
                    &ctx("shifted-hyperbolic"),
                )?;
                forbid(
                    &self.weights,
                    "discount.weights",
                    &ctx("shifted-hyperbolic"),
                )?;
                Ok(DiscountFunction::shifted_hyperbolic(need(
                    self.m,
                    "discount.m",
                    &ctx("shifted-hyperbolic"),
                )?))
            }
            Family::Tabulated => {
                forbid(&self.delta, "discount.delta", &ctx("tabulated"))?;
                forbid(
                    &self.interest_rate,
                    "discount.interest_rate",
                    &ctx("tabulated"),
                )?;
                forbid(&self.m, "discount.m", &ctx("tabulated"))?;
                let weights = self
                    .weights
                    .clone()
                    .ok_or_else(|| missing("discount.weights", &ctx("tabulated")))?;
                DiscountFunction::tabulated(weights)
                    .map_err(|e| invalid("discount.weights", e.to_string()))
            }
        }
    }

    fn from_function(f: &DiscountFunction) -> Self {
        let mut spec = DiscountSpec {
            family: Family::Hyperbolic,
            delta: None,
            interest_rate: None,
            m: None,
            weights: None,
        };
        match f {
            DiscountFunction::Exponential { delta } => {
                spec.family = Family::Exponential;
                spec.delta = Some(*delta);
            }
            DiscountFunction::Hyperbolic => {}
            DiscountFunction::ShiftedHyperbolic { m } => {
                spec.family = Family::ShiftedHyperbolic;
                spec.m = Some(*m);
            }
            DiscountFunction::Tabulated { weights } => {
                spec.family = Family::Tabulated;
                spec.weights = Some(weights.clone());
            }
        }
        spec
    }
}

impl ProblemSpec {
    fn forbid_except(&self, allowed: &[&str], context: &str) -> Result<(), CliError> {
        let present = [
            ("option_a", self.option_a.is_some()),
            ("option_b", self.option_b.is_some()),
            ("decided_at", self.decided_at.is_some()),
            ("vantages", self.vantages.is_some()),
            ("horizon", self.horizon.is_some()),
            ("endowment", self.endowment.is_some()),
            ("utility", self.utility.is_some()),
            ("deadline", self.deadline.is_some()),
            ("cost", self.cost.is_some()),
            ("benefit", self.benefit.is_some()),
            ("benefit_timing", self.benefit_timing.is_some()),
        ];
        for (name, is_set) in present {
            if is_set && !allowed.contains(&name) {
                return Err(unused(&format!("problem.{name}"), context));
            }
        }
        Ok(())
    }

    fn resolve(&self) -> Result<Problem, CliError> {
        match self.kind {
            ProblemKind::BinaryChoice => {
                let ctx = "problem kind binary-choice";
                self.forbid_except(&["option_a", "option_b", "decided_at", "vantages"], ctx)?;
                let a = reward(
                    need(self.option_a, "problem.option_a", ctx)?,
                    "problem.option_a",
                )?;
                let b = reward(
                    need(self.option_b, "problem.option_b", ctx)?,
                    "problem.option_b",
                )?;
                let decided_at = need(self.decided_at, "problem.decided_at", ctx)?;
                let choice = BinaryChoice::new(a, b, decided_at)
                    .map_err(|e| invalid("problem.decided_at", e.to_string()))?;
                let vantages = self
                    .vantages
                    .clone()
                    .unwrap_or_else(|| (0..=decided_at).collect());
                if let Some(&late) = vantages.iter().find(|&&v| v > decided_at) {
                    return Err(invalid(
                        "problem.vantages",
                        format!("vantage {late} is after the decision period {decided_at}"),
                    ));
                }
                Ok(Problem::BinaryChoice { choice, vantages })
            }
            ProblemKind::Consumption => {
                let ctx = "problem kind consumption";
                self.forbid_except(&["horizon", "endowment", "utility"], ctx)?;
                let horizon = need(self.horizon, "problem.horizon", ctx)?;
                let endowment = need(self.endowment, "problem.endowment", ctx)?;
                let utility = match self.utility {
                    None => UtilityFunction::Linear,
                    Some(u) => u.resolve()?,
                };
                if horizon < 1 {
                    return Err(invalid("problem.horizon", "must be at least 1"));
                }
                ConsumptionProblem::new(horizon, endowment, utility)
                    .map(Problem::Consumption)
                    .map_err(|e| invalid("problem", e.to_string()))
            }
            ProblemKind::Task => {
                let ctx = "problem kind task";
                self.forbid_except(&["deadline", "cost", "benefit", "benefit_timing"], ctx)?;
                let deadline = need(self.deadline, "problem.deadline", ctx)?;
                let cost = need(self.cost, "problem.cost", ctx)?;
                let benefit = need(self.benefit, "problem.benefit", ctx)?;
                if deadline < 1 {
                    return Err(invalid("problem.deadline", "must be at least 1"));
                }
                if !(cost.is_finite() && cost > 0.0) {
                    return Err(invalid(
                        "problem.cost",
                        format!("must be positive, got {cost}"),
                    ));
                }
                if !(benefit.is_finite() && benefit > 0.0) {
                    return Err(invalid(
                        "problem.benefit",
                        format!("must be positive, got {benefit}"),
                    ));
                }
                let timing = match self.benefit_timing {
                    None => BenefitTiming::AtDeadline,
                    Some(t) => t.resolve()?,
                };
                TaskProblem::new(deadline, cost, benefit, timing)
                    .map(Problem::Task)
                    .map_err(|e| invalid("problem", e.to_string()))
            }
        }
    }

    fn from_problem(p: &Problem) -> Self {
        let mut spec = ProblemSpec {
            kind: ProblemKind::BinaryChoice,
            option_a: None,
            option_b: None,
            decided_at: None,
            vantages: None,
            horizon: None,
            endowment: None,
            utility: None,
            deadline: None,
            cost: None,
            benefit: None,
            benefit_timing: None,
        };
        match p {
            Problem::BinaryChoice { choice, vantages } => {
                spec.option_a = Some(RewardSpec {
                    amount: choice.option_a.amount,
                    at: choice.option_a.at,
                });
                spec.option_b = Some(RewardSpec {
                    amount: choice.option_b.amount,
                    at: choice.option_b.at,
                });
                spec.decided_at = Some(choice.decided_at);
                spec.vantages = Some(vantages.clone());
            }
            Problem::Consumption(c) => {
                spec.kind = ProblemKind::Consumption;
                spec.horizon = Some(c.horizon);
                spec.endowment = Some(c.endowment);
                spec.utility = Some(UtilitySpec::from_utility(&c.utility));
            }
            Problem::Task(t) => {
                spec.kind = ProblemKind::Task;
                spec.deadline = Some(t.deadline);
                spec.cost = Some(t.cost);
                spec.benefit = Some(t.benefit);
                spec.benefit_timing = Some(match t.benefit_timing {
                    BenefitTiming::AtDeadline => TimingSpec {
                        kind: TimingKind::AtDeadline,
                        lag: None,
                    },
                    BenefitTiming::AfterAction { lag } => TimingSpec {
                        kind: TimingKind::AfterAction,
                        lag: Some(lag),
                    },
                });
            }
        }
        spec
    }
}

impl UtilitySpec {
    fn resolve(&self) -> Result<UtilityFunction, CliError> {
        let u = match self.kind {
            UtilityKind::Linear => {
                forbid(
                    &self.exponent,
                    "problem.utility.exponent",
                    "utility kind linear",
                )?;
                UtilityFunction::Linear
            }
            UtilityKind::Log => {
                forbid(
                    &self.exponent,
                    "problem.utility.exponent",
                    "utility kind log",
                )?;
                UtilityFunction::Log
            }
            UtilityKind::Power => UtilityFunction::Power {
                exponent: need(
                    self.exponent,
                    "problem.utility.exponent",
                    "utility kind power",
                )?,
            },
        };
        u.validate()
            .map_err(|e| invalid("problem.utility.exponent", e.to_string()))?;
        Ok(u)
    }

    fn from_utility(u: &UtilityFunction) -> Self {
        match u {
            UtilityFunction::Linear => UtilitySpec {
                kind: UtilityKind::Linear,
                exponent: None,
            },
            UtilityFunction::Log => UtilitySpec {
                kind: UtilityKind::Log,
                exponent: None,
            },
            UtilityFunction::Power { exponent } => UtilitySpec {
                kind: UtilityKind::Power,
                exponent: Some(*exponent),
            },
        }
    }
}

impl TimingSpec {
    fn resolve(&self) -> Result<BenefitTiming, CliError> {
        match self.kind {
            TimingKind::AtDeadline => {
                forbid(
                    &self.lag,
                    "problem.benefit_timing.lag",
                    "benefit timing at-deadline",
                )?;
                Ok(BenefitTiming::AtDeadline)
            }
            TimingKind::AfterAction => Ok(BenefitTiming::AfterAction {
                lag: need(
                    self.lag,
                    "problem.benefit_timing.lag",
                    "benefit timing after-action",
                )?,
            }),
        }
    }
}

impl AgentSpec {
    fn resolve(&self) -> Result<AgentKind, CliError> {
        let plain = |kind: AgentKind, name: &str| -> Result<AgentKind, CliError> {
            let ctx = format!("agent kind {name}");
            forbid(&self.modify_at, "agent.modify_at", &ctx)?;
            forbid(&self.before, "agent.before", &ctx)?;
            Ok(kind)
        };
        match self.kind {
            AgentKindSpec::Naive => plain(AgentKind::Naive, "naive"),
            AgentKindSpec::Sophisticated => plain(AgentKind::Sophisticated, "sophisticated"),
            AgentKindSpec::Committed => plain(AgentKind::Committed, "committed"),
            AgentKindSpec::SelfModifying => Ok(AgentKind::SelfModifying {
                modify_at: need(
                    self.modify_at,
                    "agent.modify_at",
                    "agent kind self-modifying",
                )?,
                before: self.before.unwrap_or_default(),
            }),
        }
    }

    fn from_kind(kind: &AgentKind) -> Self {
        let plain = |kind| AgentSpec {
            kind,
            modify_at: None,
            before: None,
        };
        match kind {
            AgentKind::Naive => plain(AgentKindSpec::Naive),
            AgentKind::Sophisticated => plain(AgentKindSpec::Sophisticated),
            AgentKind::Committed => plain(AgentKindSpec::Committed),
            AgentKind::SelfModifying { modify_at, before } => AgentSpec {
                kind: AgentKindSpec::SelfModifying,
                modify_at: Some(*modify_at),
                before: Some(*before),
            },
        }
    }
}

fn itinerary(segments: &[ClockSegment], field: &str) -> Result<Itinerary, CliError> {
    if segments.is_empty() {
        return Err(invalid(
            field,
            "itinerary must contain at least one segment",
        ));
    }
    for (i, seg) in segments.iter().enumerate() {
        seg.validate()
            .map_err(|e| invalid(&format!("{field}[{i}]"), e.to_string()))?;
    }
    Itinerary::new(segments.to_vec()).map_err(|e| invalid(field, e.to_string()))
}

impl ScenarioFile {
    pub fn resolve(&self) -> Result<Scenario, CliError> {
        let discount = self.discount.resolve()?;
        let problem = self
            .problem
            .as_ref()
            .map(ProblemSpec::resolve)
            .transpose()?;
        let agent = self.agent.as_ref().map(AgentSpec::resolve).transpose()?;
        if let (Some(AgentKind::SelfModifying { modify_at, .. }), Some(p)) = (agent, &problem) {
            let horizon = match p {
                Problem::Consumption(c) => Some(c.horizon),
                Problem::Task(t) => Some(t.deadline),
                Problem::BinaryChoice { .. } => None,
            };
            if let Some(h) = horizon {
                if modify_at >= h {
                    return Err(invalid(
                        "agent.modify_at",
                        format!("must be below the horizon {h}, got {modify_at}"),
                    ));
                }
            }
        }
        let commitment = match &self.commitment {
            None => None,
            Some(c) => {
                if !(c.penalty.is_finite() && c.penalty >= 0.0) {
                    return Err(invalid(
                        "commitment.penalty",
                        format!("must be finite and nonnegative, got {}", c.penalty),
                    ));
                }
                let reference: Option<Vec<chronopref::Action>> =
                    c.reference.as_ref().map(|steps| {
                        steps
                            .iter()
                            .map(|s| match s {
                                PlanStep::Consume(r) => chronopref::Action::Consume(*r),
                                PlanStep::Task(TaskStep::Act) => chronopref::Action::Act,
                                PlanStep::Task(TaskStep::Wait) => chronopref::Action::Wait,
                            })
                            .collect()
                    });
                if let (Some(plan), Some(p)) = (&reference, &problem) {
                    let checked = match p {
                        Problem::Consumption(c) => {
                            apply_commitment_penalty(*c, plan.clone(), 0.0).map(|_| ())
                        }
                        Problem::Task(t) => {
                            apply_commitment_penalty(*t, plan.clone(), 0.0).map(|_| ())
                        }
                        Problem::BinaryChoice { .. } => Ok(()),
                    };
                    checked.map_err(|e| invalid("commitment.reference", e.to_string()))?;
                }
                Some(Commitment {
                    penalty: c.penalty,
                    reference,
                })
            }
        };
        let consistency = match self.consistency {
            None => None,
            Some(c) => {
                if c.horizon < 2 {
                    return Err(invalid(
                        "consistency.horizon",
                        format!("must be at least 2, got {}", c.horizon),
                    ));
                }
                if !(c.tolerance.is_finite() && c.tolerance >= 0.0) {
                    return Err(invalid(
                        "consistency.tolerance",
                        format!("must be finite and nonnegative, got {}", c.tolerance),
                    ));
                }
                Some(c)
            }
        };
        let reversal = self
            .reversal
            .as_ref()
            .map(|r| -> Result<ReversalGrid, CliError> {
                Ok(ReversalGrid {
                    amounts: amount_grid(&r.amounts, r.max_amount, "reversal")?,
                    delay_bound: r.delay_bound,
                    vantage_bound: r.vantage_bound,
                })
            })
            .transpose()?;
        let relativity = self
            .relativity
            .as_ref()
            .map(|r| -> Result<Relativity, CliError> {
                if r.probe.is_some() && r.search.is_some() {
                    return Err(invalid(
                        "relativity.search",
                        "give either `probe` or `search`, not both",
                    ));
                }
                let home = itinerary(&r.home, "relativity.home")?;
                let traveler = r
                    .traveler
                    .as_deref()
                    .map(|t| itinerary(t, "relativity.traveler"))
                    .transpose()?;
                let probe = r
                    .probe
                    .as_ref()
                    .map(|p| {
                        let a = reward(p.option_a, "relativity.probe.option_a")?;
                        let b = reward(p.option_b, "relativity.probe.option_b")?;
                        BinaryChoice::new(a, b, p.decided_at)
                            .map_err(|e| invalid("relativity.probe.decided_at", e.to_string()))
                    })
                    .transpose()?;
                let search = r
                    .search
                    .as_ref()
                    .map(|s| -> Result<ProbeGrid, CliError> {
                        Ok(ProbeGrid {
                            amounts: amount_grid(&s.amounts, s.max_amount, "relativity.search")?,
                            delay_bound: s.delay_bound,
                        })
                    })
                    .transpose()?;
                Ok(Relativity {
                    home,
                    traveler,
                    probe,
                    search,
                    delay_clock: r.delay_clock.unwrap_or_default(),
                })
            })
            .transpose()?;
        Ok(Scenario {
            discount,
            problem,
            agent,
            commitment,
            consistency,
            reversal,
            relativity,
            output: self.output.clone().unwrap_or_default(),
        })
    }
}

impl Scenario {
    /// The canonical file form of this scenario; defaults are written out.
    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            discount: DiscountSpec::from_function(&self.discount),
            problem: self.problem.as_ref().map(ProblemSpec::from_problem),
            agent: self.agent.as_ref().map(AgentSpec::from_kind),
            commitment: self.commitment.as_ref().map(|c| CommitmentSpec {
                penalty: c.penalty,
                reference: c.reference.as_ref().map(|plan| {
                    plan.iter()
                        .map(|a| match a {
                            chronopref::Action::Consume(r) => PlanStep::Consume(*r),
                            chronopref::Action::Act => PlanStep::Task(TaskStep::Act),
                            chronopref::Action::Wait => PlanStep::Task(TaskStep::Wait),
                        })
                        .collect()
                }),
            }),
            consistency: self.consistency,
            reversal: self.reversal.as_ref().map(|r| ReversalSpec {
                amounts: Some(r.amounts.clone()),
                max_amount: None,
                delay_bound: r.delay_bound,
                vantage_bound: r.vantage_bound,
            }),
            relativity: self.relativity.as_ref().map(|r| RelativitySpec {
                home: r.home.segments.clone(),
                traveler: r.traveler.as_ref().map(|t| t.segments.clone()),
                probe: r.probe.as_ref().map(|p| ProbeSpec {
                    option_a: RewardSpec {
                        amount: p.option_a.amount,
                        at: p.option_a.at,
                    },
                    option_b: RewardSpec {
                        amount: p.option_b.amount,
                        at: p.option_b.at,
                    },
                    decided_at: p.decided_at,
                }),
                search: r.search.as_ref().map(|s| ProbeSearchSpec {
                    amounts: Some(s.amounts.clone()),
                    max_amount: None,
                    delay_bound: s.delay_bound,
                }),
                delay_clock: Some(r.delay_clock),
            }),
            output: Some(self.output.clone()),
        }
    }
}

fn schema_error(path: String, message: String) -> CliError {
    let code = if message.starts_with("unknown field") || message.starts_with("unknown variant") {
        if message.starts_with("unknown variant") {
            ErrorCode::InvalidValue
        } else {
            ErrorCode::UnknownField
        }
    } else if message.starts_with("missing field") {
        ErrorCode::MissingField
    } else {
        ErrorCode::Schema
    };
    if path.is_empty() || path == "." {
        CliError::new(code, message)
    } else {
        CliError::new(code, format!("{path}: {message}"))
    }
}

/// Parses and validates a scenario. Text whose first non-blank character is
/// `{` is read as JSON, anything else as TOML.
pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let file: ScenarioFile = if text.trim_start().starts_with('{') {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| CliError::new(ErrorCode::Syntax, e.to_string()))?;
        serde_path_to_error::deserialize(value)
            .map_err(|e| schema_error(e.path().to_string(), e.inner().to_string()))?
    } else {
        if text.trim().is_empty() {
            return Err(CliError::new(
                ErrorCode::Syntax,
                "scenario document is empty",
            ));
        }
        let value: toml::Value = toml::from_str(text).map_err(|e| {
            let message = match e.span() {
                Some(span) => {
                    let line = text[..span.start].matches('\n').count() + 1;
                    format!("line {line}: {}", e.message())
                }
                None => e.message().to_string(),
            };
            CliError::new(ErrorCode::Syntax, message)
        })?;
        serde_path_to_error::deserialize(value)
            .map_err(|e| schema_error(e.path().to_string(), e.inner().message().to_string()))?
    };
    file.resolve()
}
