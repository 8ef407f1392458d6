use chronopref::{
    apply_commitment_penalty, check_consistency, choose, clone_divergence, elapsed_proper_time,
    find_divergent_probe, find_reversal, optimal_plan, proper_time, simulate, verify_witness,
    Action, AgentKind, BenefitTiming, BinaryChoice, ChoiceOutcome, ConsistencyVerdict,
    DivergenceReport, Itinerary, ReversalWitness, SequentialProblem, Trajectory, UtilityFunction,
};
use serde::Serialize;

use crate::error::{CliError, ErrorCode};
use crate::report::{num, to_json, Report, Table};
use crate::scenario::{Problem, Scenario};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Run,
    /// `vantages` replaces the scenario's list when given.
    Choose {
        vantages: Option<Vec<u32>>,
    },
    CheckConsistency,
    FindReversal,
    Dilate,
    CloneCompare,
    CompareAgents,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Choose { .. } => "choose",
            Command::CheckConsistency => "check-consistency",
            Command::FindReversal => "find-reversal",
            Command::Dilate => "dilate",
            Command::CloneCompare => "clone-compare",
            Command::CompareAgents => "compare-agents",
        }
    }
}

fn missing_section(section: &str, command: &str) -> CliError {
    CliError::new(
        ErrorCode::MissingSection,
        format!("`{command}` needs the [{section}] section"),
    )
}

fn plan_text(actions: &[Action]) -> String {
    actions
        .iter()
        .map(Action::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Runs `command` on a validated scenario. Nothing is printed here.
pub fn execute(command: &Command, scenario: &Scenario) -> Result<Report, CliError> {
    let mut scenario = scenario.clone();
    if let Command::Choose { vantages: Some(v) } = command {
        match &mut scenario.problem {
            Some(Problem::BinaryChoice { vantages, .. }) => *vantages = v.clone(),
            _ => return Err(missing_section("problem", "choose")),
        }
    }
    let name = command.name();
    let body = match command {
        Command::Run => match &scenario.problem {
            Some(Problem::BinaryChoice { .. }) => choice_report(&scenario, name)?,
            Some(_) => run_report(&scenario)?,
            None => return Err(missing_section("problem", name)),
        },
        Command::Choose { .. } => choice_report(&scenario, name)?,
        Command::CheckConsistency => consistency_report(&scenario)?,
        Command::FindReversal => reversal_report(&scenario)?,
        Command::Dilate => dilate_report(&scenario)?,
        Command::CloneCompare => clone_report(&scenario)?,
        Command::CompareAgents => compare_report(&scenario)?,
    };
    Ok(Report {
        command: name,
        scenario: scenario.to_file(),
        summary: body.summary,
        table: body.table,
        result: body.result,
    })
}

/// What a command computed, before it is wrapped into a [`Report`].
struct Body {
    summary: Vec<(String, String)>,
    table: Table,
    result: serde_json::Value,
}

fn body(table: Table) -> Body {
    Body {
        summary: Vec::new(),
        table,
        result: serde_json::Value::Null,
    }
}

#[derive(Serialize)]
struct ChoiceResult<'a> {
    choice: &'a BinaryChoice,
    outcomes: Vec<ChoiceOutcome>,
}

fn choice_report(s: &Scenario, name: &str) -> Result<Body, CliError> {
    let Some(Problem::BinaryChoice { choice, vantages }) = &s.problem else {
        return Err(CliError::new(
            ErrorCode::MissingSection,
            format!("`{name}` needs a binary-choice [problem]"),
        ));
    };
    let mut table = Table::new(&["vantage", "value_a", "value_b", "selection"]);
    let mut outcomes = Vec::new();
    for &v in vantages {
        let o = choose(choice, &s.discount, v)?;
        table.push(vec![
            v.to_string(),
            num(o.value_a),
            num(o.value_b),
            o.selection.to_string(),
        ]);
        outcomes.push(o);
    }
    let mut out = body(table);
    out.summary = vec![
        ("discount".into(), s.discount.to_string()),
        (
            "option A".into(),
            format!("{} at {}", num(choice.option_a.amount), choice.option_a.at),
        ),
        (
            "option B".into(),
            format!("{} at {}", num(choice.option_b.amount), choice.option_b.at),
        ),
        ("decided at".into(), choice.decided_at.to_string()),
    ];
    out.result = to_json(&ChoiceResult { choice, outcomes })?;
    Ok(out)
}

#[derive(Serialize)]
struct RunResult {
    agent: AgentKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    penalty: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference_plan: Option<Vec<Action>>,
    trajectory: Trajectory,
}

/// Simulates `kinds` on the scenario's sequential problem, wrapped in the
/// commitment penalty when one is configured.
fn simulate_all(
    s: &Scenario,
    kinds: &[AgentKind],
) -> Result<(Vec<Trajectory>, Option<Vec<Action>>), CliError> {
    fn go<P: SequentialProblem + Copy>(
        p: P,
        s: &Scenario,
        kinds: &[AgentKind],
    ) -> Result<(Vec<Trajectory>, Option<Vec<Action>>), CliError> {
        match &s.commitment {
            None => {
                let runs = kinds
                    .iter()
                    .map(|&k| simulate(&p, &s.discount, k))
                    .collect::<Result<_, _>>()?;
                Ok((runs, None))
            }
            Some(c) => {
                let reference = match &c.reference {
                    Some(plan) => plan.clone(),
                    None => optimal_plan(&p, &s.discount, 0, &[])?.actions,
                };
                let penalized = apply_commitment_penalty(p, reference.clone(), c.penalty)?;
                let runs = kinds
                    .iter()
                    .map(|&k| simulate(&penalized, &s.discount, k))
                    .collect::<Result<_, _>>()?;
                Ok((runs, Some(reference)))
            }
        }
    }
    match &s.problem {
        Some(Problem::Consumption(p)) => go(*p, s, kinds),
        Some(Problem::Task(p)) => go(*p, s, kinds),
        _ => Err(CliError::new(
            ErrorCode::MissingSection,
            "agents need a consumption or task [problem]",
        )),
    }
}

fn problem_text(s: &Scenario) -> String {
    match &s.problem {
        Some(Problem::Consumption(c)) => {
            let utility = match c.utility {
                UtilityFunction::Linear => "linear".to_string(),
                UtilityFunction::Log => "log".to_string(),
                UtilityFunction::Power { exponent } => format!("power {}", num(exponent)),
            };
            format!(
                "consumption, horizon {}, endowment {}, {utility} utility",
                c.horizon, c.endowment
            )
        }
        Some(Problem::Task(t)) => {
            let timing = match t.benefit_timing {
                BenefitTiming::AtDeadline => "paid at the deadline".to_string(),
                BenefitTiming::AfterAction { lag } => format!("paid {lag} after acting"),
            };
            format!(
                "task, deadline {}, cost {}, benefit {} {timing}",
                t.deadline,
                num(t.cost),
                num(t.benefit)
            )
        }
        Some(Problem::BinaryChoice { .. }) => "binary choice".into(),
        None => "none".into(),
    }
}

fn commitment_summary(
    s: &Scenario,
    reference: &Option<Vec<Action>>,
    summary: &mut Vec<(String, String)>,
) {
    if let (Some(c), Some(plan)) = (&s.commitment, reference) {
        summary.push(("penalty".into(), num(c.penalty)));
        summary.push(("reference plan".into(), plan_text(plan)));
    }
}

fn run_report(s: &Scenario) -> Result<Body, CliError> {
    let kind = s.agent.ok_or_else(|| missing_section("agent", "run"))?;
    let (mut runs, reference) = simulate_all(s, &[kind])?;
    let trajectory = runs.remove(0);
    let mut table = Table::new(&[
        "period",
        "action",
        "evaluation",
        "realized_value",
        "discount",
        "intended_plan",
    ]);
    for (t, action) in trajectory.actions.iter().enumerate() {
        table.push(vec![
            t.to_string(),
            action.to_string(),
            num(trajectory.evaluations[t]),
            num(trajectory.realized_value_from[t]),
            trajectory.discount_used[t].to_string(),
            plan_text(&trajectory.intended_plans[t]),
        ]);
    }
    let broken = trajectory.broken_intentions();
    let mut out = body(table);
    out.summary = vec![
        ("discount".into(), s.discount.to_string()),
        ("problem".into(), problem_text(s)),
        ("agent".into(), kind.to_string()),
        ("path".into(), plan_text(&trajectory.actions)),
        (
            "realized value".into(),
            num(trajectory.realized_value_from[0]),
        ),
        (
            "broken intentions".into(),
            if broken.is_empty() {
                "none".into()
            } else {
                broken
                    .iter()
                    .map(u32::to_string)
                    .collect::<Vec<_>>()
                    .join(", ")
            },
        ),
    ];
    commitment_summary(s, &reference, &mut out.summary);
    out.result = to_json(&RunResult {
        agent: kind,
        penalty: s.commitment.as_ref().map(|c| c.penalty),
        reference_plan: reference,
        trajectory,
    })?;
    Ok(out)
}

#[derive(Serialize)]
struct PathDifference {
    first: String,
    second: String,
    /// First period at which the executed actions differ, if any.
    first_difference: Option<u32>,
}

#[derive(Serialize)]
struct CompareResult {
    #[serde(skip_serializing_if = "Option::is_none")]
    penalty: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference_plan: Option<Vec<Action>>,
    trajectories: Vec<Trajectory>,
    differences: Vec<PathDifference>,
}

fn compare_report(s: &Scenario) -> Result<Body, CliError> {
    let modified = match s.agent {
        Some(k @ AgentKind::SelfModifying { .. }) => k,
        _ => AgentKind::self_modifying(0),
    };
    let kinds = [
        AgentKind::Naive,
        AgentKind::Sophisticated,
        AgentKind::Committed,
        modified,
    ];
    let (runs, reference) = simulate_all(s, &kinds)?;
    let mut table = Table::new(&["agent", "period", "action", "evaluation", "intended_plan"]);
    for run in &runs {
        for (t, action) in run.actions.iter().enumerate() {
            table.push(vec![
                run.kind.label().to_string(),
                t.to_string(),
                action.to_string(),
                num(run.evaluations[t]),
                plan_text(&run.intended_plans[t]),
            ]);
        }
    }
    let mut differences = Vec::new();
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            let first_difference = runs[i]
                .actions
                .iter()
                .zip(&runs[j].actions)
                .position(|(a, b)| a != b)
                .map(|p| p as u32);
            differences.push(PathDifference {
                first: runs[i].kind.to_string(),
                second: runs[j].kind.to_string(),
                first_difference,
            });
        }
    }
    let mut out = body(table);
    out.summary = vec![
        ("discount".into(), s.discount.to_string()),
        ("problem".into(), problem_text(s)),
    ];
    commitment_summary(s, &reference, &mut out.summary);
    for run in &runs {
        out.summary.push((
            run.kind.to_string(),
            format!(
                "{} (value {})",
                plan_text(&run.actions),
                num(run.realized_value_from[0])
            ),
        ));
    }
    for d in &differences {
        let verdict = match d.first_difference {
            None => "same path".to_string(),
            Some(p) => format!("differ from period {p}"),
        };
        out.summary
            .push((format!("{} vs {}", d.first, d.second), verdict));
    }
    out.result = to_json(&CompareResult {
        penalty: s.commitment.as_ref().map(|c| c.penalty),
        reference_plan: reference,
        trajectories: runs,
        differences,
    })?;
    Ok(out)
}

fn consistency_report(s: &Scenario) -> Result<Body, CliError> {
    let spec = s.consistency.unwrap_or_default();
    let verdict: ConsistencyVerdict = check_consistency(&s.discount, spec.horizon, spec.tolerance)?;
    let mut table = Table::new(&[
        "discount",
        "horizon",
        "tolerance",
        "consistent",
        "max_deviation",
        "witness_a",
        "witness_b",
        "ratio_a",
        "ratio_b",
    ]);
    let w = verdict.witness.as_ref();
    table.push(vec![
        s.discount.to_string(),
        verdict.horizon.to_string(),
        num(verdict.tolerance),
        verdict.consistent.to_string(),
        num(verdict.max_deviation),
        w.map(|w| w.a.to_string()).unwrap_or_default(),
        w.map(|w| w.b.to_string()).unwrap_or_default(),
        w.map(|w| num(w.ratio_a)).unwrap_or_default(),
        w.map(|w| num(w.ratio_b)).unwrap_or_default(),
    ]);
    let mut out = body(table);
    out.summary = vec![
        ("discount".into(), s.discount.to_string()),
        (
            "verdict".into(),
            if verdict.consistent {
                "consistent"
            } else {
                "inconsistent"
            }
            .into(),
        ),
    ];
    if let Some(w) = w {
        out.summary.push((
            "witness".into(),
            format!(
                "w({})/w({}) = {} but w({})/w({}) = {}",
                w.a + 1,
                w.a,
                num(w.ratio_a),
                w.b + 1,
                w.b,
                num(w.ratio_b)
            ),
        ));
    }
    out.result = to_json(&verdict)?;
    Ok(out)
}

#[derive(Serialize)]
struct ReversalResult {
    witness: Option<ReversalWitness>,
    verified: bool,
}

fn reversal_report(s: &Scenario) -> Result<Body, CliError> {
    let grid = s
        .reversal
        .as_ref()
        .ok_or_else(|| missing_section("reversal", "find-reversal"))?;
    let witness = find_reversal(
        &s.discount,
        &grid.amounts,
        grid.delay_bound,
        grid.vantage_bound,
    )?;
    let verified = witness
        .as_ref()
        .is_some_and(|w| verify_witness(w, &s.discount));
    let mut table = Table::new(&[
        "found",
        "small_amount",
        "small_at",
        "large_amount",
        "large_at",
        "early_vantage",
        "late_vantage",
        "early_small_value",
        "early_large_value",
        "late_small_value",
        "late_large_value",
        "verified",
    ]);
    let mut report_summary = vec![("discount".to_string(), s.discount.to_string())];
    match &witness {
        Some(w) => {
            table.push(vec![
                "true".into(),
                num(w.small.amount),
                w.small.at.to_string(),
                num(w.large.amount),
                w.large.at.to_string(),
                w.early_vantage.to_string(),
                w.late_vantage.to_string(),
                num(w.early_small_value),
                num(w.early_large_value),
                num(w.late_small_value),
                num(w.late_large_value),
                verified.to_string(),
            ]);
            report_summary.push((
                "reversal".into(),
                format!(
                    "{} at {} vs {} at {}: from {} values {} < {}, from {} values {} > {}",
                    num(w.small.amount),
                    w.small.at,
                    num(w.large.amount),
                    w.large.at,
                    w.early_vantage,
                    num(w.early_small_value),
                    num(w.early_large_value),
                    w.late_vantage,
                    num(w.late_small_value),
                    num(w.late_large_value)
                ),
            ));
        }
        None => {
            let mut row = vec![String::new(); table.columns.len()];
            row[0] = "false".into();
            row[11] = "false".into();
            table.push(row);
            report_summary.push(("reversal".into(), "none on this grid".into()));
        }
    }
    let mut out = body(table);
    out.summary = report_summary;
    out.result = to_json(&ReversalResult { witness, verified })?;
    Ok(out)
}

#[derive(Serialize)]
struct SegmentTime {
    coordinate_duration: f64,
    beta: f64,
    gravity_ratio: f64,
    clock_rate: f64,
    proper_time: f64,
}

#[derive(Serialize)]
struct ItineraryTime {
    name: &'static str,
    segments: Vec<SegmentTime>,
    coordinate_span: f64,
    elapsed_proper_time: f64,
}

fn itinerary_time(name: &'static str, it: &Itinerary) -> Result<ItineraryTime, CliError> {
    let segments = it
        .segments
        .iter()
        .map(|seg| {
            Ok(SegmentTime {
                coordinate_duration: seg.coordinate_duration,
                beta: seg.beta,
                gravity_ratio: seg.gravity_ratio,
                clock_rate: seg.clock_rate(),
                proper_time: proper_time(seg)?,
            })
        })
        .collect::<Result<Vec<_>, chronopref::Error>>()?;
    Ok(ItineraryTime {
        name,
        segments,
        coordinate_span: it.coordinate_span(),
        elapsed_proper_time: elapsed_proper_time(it)?,
    })
}

fn dilate_report(s: &Scenario) -> Result<Body, CliError> {
    let rel = s
        .relativity
        .as_ref()
        .ok_or_else(|| missing_section("relativity", "dilate"))?;
    let mut times = vec![itinerary_time("home", &rel.home)?];
    if let Some(t) = &rel.traveler {
        times.push(itinerary_time("traveler", t)?);
    }
    let mut table = Table::new(&[
        "itinerary",
        "segment",
        "coordinate_duration",
        "beta",
        "gravity_ratio",
        "clock_rate",
        "proper_time",
    ]);
    let mut summary = Vec::new();
    for it in &times {
        for (i, seg) in it.segments.iter().enumerate() {
            table.push(vec![
                it.name.into(),
                i.to_string(),
                num(seg.coordinate_duration),
                num(seg.beta),
                num(seg.gravity_ratio),
                num(seg.clock_rate),
                num(seg.proper_time),
            ]);
        }
        table.push(vec![
            it.name.into(),
            "total".into(),
            num(it.coordinate_span),
            String::new(),
            String::new(),
            num(it.elapsed_proper_time / it.coordinate_span),
            num(it.elapsed_proper_time),
        ]);
        summary.push((
            it.name.to_string(),
            format!(
                "{} proper over {} coordinate",
                num(it.elapsed_proper_time),
                num(it.coordinate_span)
            ),
        ));
    }
    let mut out = body(table);
    out.summary = summary;
    out.result = to_json(&times)?;
    Ok(out)
}

#[derive(Serialize)]
struct CloneResult {
    searched: bool,
    probe: Option<BinaryChoice>,
    report: Option<DivergenceReport>,
}

fn clone_report(s: &Scenario) -> Result<Body, CliError> {
    let rel = s
        .relativity
        .as_ref()
        .ok_or_else(|| missing_section("relativity", "clone-compare"))?;
    let traveler = rel.traveler.as_ref().ok_or_else(|| {
        CliError::new(
            ErrorCode::MissingField,
            "relativity.traveler: required for clone-compare",
        )
    })?;
    let (searched, found) = match (&rel.probe, &rel.search) {
        (Some(probe), _) => (
            false,
            Some((
                *probe,
                clone_divergence(&s.discount, &rel.home, traveler, probe, rel.delay_clock)?,
            )),
        ),
        (None, Some(grid)) => (
            true,
            find_divergent_probe(
                &s.discount,
                &rel.home,
                traveler,
                &grid.amounts,
                grid.delay_bound,
                rel.delay_clock,
            )?,
        ),
        (None, None) => {
            return Err(CliError::new(
                ErrorCode::MissingField,
                "relativity.probe: clone-compare needs a probe or a search grid",
            ))
        }
    };
    let mut table = Table::new(&[
        "clone",
        "elapsed_proper_time",
        "elapsed_periods",
        "clock_rate",
        "delay_a",
        "delay_b",
        "value_a",
        "value_b",
        "selection",
    ]);
    let mut summary = vec![
        ("discount".to_string(), s.discount.to_string()),
        (
            "delay clock".to_string(),
            format!("{:?}", rel.delay_clock).to_lowercase(),
        ),
    ];
    if let Some((probe, r)) = &found {
        for (name, v) in [("home", &r.home), ("traveler", &r.traveler)] {
            table.push(vec![
                name.into(),
                num(v.elapsed_proper_time),
                v.elapsed_periods.to_string(),
                num(v.clock_rate),
                v.delay_a.to_string(),
                v.delay_b.to_string(),
                num(v.value_a),
                num(v.value_b),
                v.selection.to_string(),
            ]);
        }
        summary.push((
            "probe".into(),
            format!(
                "A = {} at {}, B = {} at {}, decided at {}",
                num(probe.option_a.amount),
                probe.option_a.at,
                num(probe.option_b.amount),
                probe.option_b.at,
                probe.decided_at
            ),
        ));
        summary.push(("diverges".into(), r.diverges.to_string()));
    } else {
        summary.push(("probe".into(), "no divergent probe on this grid".into()));
        summary.push(("diverges".into(), "false".into()));
    }
    let (probe, report_body) = match found {
        Some((p, r)) => (Some(p), Some(r)),
        None => (None, None),
    };
    let mut out = body(table);
    out.summary = summary;
    out.result = to_json(&CloneResult {
        searched,
        probe,
        report: report_body,
    })?;
    Ok(out)
}
