use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chronopref_cli::{parse_scenario, process, Command as Cmd, OutputFormat, OutputOverride};
use serde::Deserialize;

const BIN: &str = env!("CARGO_BIN_EXE_chronopref");

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn scenario(name: &str) -> PathBuf {
    crate_dir().join("scenarios").join(name)
}

fn cli(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[derive(Deserialize)]
struct Cases {
    case: Vec<Case>,
}

#[derive(Deserialize)]
struct Case {
    file: String,
    command: String,
    code: String,
    #[serde(default)]
    mentions: Option<String>,
}

fn invalid_cases() -> Vec<Case> {
    let dir = crate_dir().join("tests/fixtures/invalid");
    let text = std::fs::read_to_string(dir.join("cases.toml")).unwrap();
    toml::from_str::<Cases>(&text).unwrap().case
}

#[test]
fn every_invalid_fixture_fails_with_its_code_and_no_report() {
    let dir = crate_dir().join("tests/fixtures/invalid");
    let cases = invalid_cases();
    let listed: std::collections::BTreeSet<_> = cases.iter().map(|c| c.file.clone()).collect();
    for entry in std::fs::read_dir(&dir).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        if name != "cases.toml" {
            assert!(listed.contains(&name), "{name} has no entry in cases.toml");
        }
    }
    for case in &cases {
        for format in ["table", "csv", "json"] {
            let path = dir.join(&case.file);
            let out = cli(&[&case.command, path_str(&path), "--format", format]);
            let stderr = String::from_utf8_lossy(&out.stderr);
            let expected_status = if matches!(case.code.as_str(), "domain" | "io") {
                3
            } else {
                2
            };
            assert_eq!(
                out.status.code(),
                Some(expected_status),
                "{}: {stderr}",
                case.file
            );
            assert!(
                stderr.starts_with(&format!("error[{}]", case.code)),
                "{}: expected {}, got {stderr}",
                case.file,
                case.code
            );
            if let Some(word) = &case.mentions {
                assert!(
                    stderr.contains(word.as_str()),
                    "{}: {stderr} does not name {word}",
                    case.file
                );
            }
            assert!(
                out.stdout.is_empty(),
                "{}: partial report on stdout",
                case.file
            );
        }
    }
}

#[test]
fn missing_scenario_file_is_an_io_error() {
    let out = cli(&["run", "/nonexistent/scenario.toml"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[io]"));
}

#[test]
fn golden_binary_choice_csv() {
    let out = cli(&[
        "run",
        path_str(&scenario("binary_choice.toml")),
        "--format",
        "csv",
    ]);
    assert_eq!(
        stdout(&out),
        "vantage,value_a,value_b,selection\n0,8,10,B\n1,16,15,A\n"
    );
}

#[test]
fn choose_vantage_flag_replaces_the_list() {
    let out = cli(&[
        "choose",
        path_str(&scenario("binary_choice.toml")),
        "--vantage",
        "1",
        "--format",
        "csv",
    ]);
    assert_eq!(
        stdout(&out),
        "vantage,value_a,value_b,selection\n1,16,15,A\n"
    );
}

#[test]
fn choose_vantage_after_decision_is_a_domain_error() {
    let out = cli(&[
        "choose",
        path_str(&scenario("binary_choice.toml")),
        "--vantage",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
}

#[test]
fn consistency_verdicts() {
    let out = cli(&[
        "check-consistency",
        path_str(&scenario("consistency.toml")),
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["result"]["consistent"], true);
    let out = cli(&[
        "check-consistency",
        path_str(&scenario("reversal.toml")),
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["result"]["consistent"], false);
    assert_eq!(v["result"]["witness"]["b"], 1);
}

#[test]
fn reversal_report_carries_all_four_values() {
    let out = cli(&[
        "find-reversal",
        path_str(&scenario("reversal.toml")),
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let w = &v["result"]["witness"];
    for key in [
        "early_small_value",
        "early_large_value",
        "late_small_value",
        "late_large_value",
    ] {
        assert!(w[key].is_f64(), "{key} missing");
    }
    assert_eq!(v["result"]["verified"], true);
}

#[test]
fn procrastination_shows_broken_intentions() {
    let out = cli(&["run", path_str(&scenario("task.toml")), "--format", "csv"]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "period,action,evaluation,realized_value,discount,intended_plan"
    );
    let intended: Vec<String> = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().to_string())
        .collect();
    assert_eq!(intended, ["wait; wait; act", "wait; act", "wait"]);
    assert!(text
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(1) == Some("wait")));
}

#[test]
fn commitment_scenario_follows_the_reference() {
    let out = cli(&[
        "run",
        path_str(&scenario("commitment.toml")),
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(
        v["result"]["trajectory"]["actions"],
        serde_json::json!(["wait", "wait", "act"])
    );
    assert_eq!(
        v["result"]["reference_plan"],
        serde_json::json!(["wait", "wait", "act"])
    );
}

#[test]
fn dilate_reports_proper_times() {
    let out = cli(&[
        "dilate",
        path_str(&scenario("twins.toml")),
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let home = v["result"][0]["elapsed_proper_time"].as_f64().unwrap();
    let traveler = v["result"][1]["elapsed_proper_time"].as_f64().unwrap();
    assert!((home - 10.0).abs() < 1e-12);
    assert!((traveler - 6.0).abs() < 1e-12);
}

#[test]
fn clone_compare_finds_divergence() {
    for name in ["twins.toml", "twins_probe.toml"] {
        let out = cli(&[
            "clone-compare",
            path_str(&scenario(name)),
            "--format",
            "json",
        ]);
        let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(v["result"]["report"]["diverges"], true, "{name}");
    }
}

#[test]
fn compare_agents_lists_all_four() {
    let out = cli(&[
        "compare-agents",
        path_str(&scenario("task.toml")),
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let kinds: Vec<&str> = v["result"]["trajectories"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["kind"]["kind"].as_str().unwrap())
        .collect();
    assert_eq!(
        kinds,
        ["naive", "sophisticated", "committed", "self-modifying"]
    );
    assert_eq!(v["result"]["differences"].as_array().unwrap().len(), 6);
}

#[test]
fn output_flag_writes_file_and_nothing_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.csv");
    let out = cli(&[
        "run",
        path_str(&scenario("consumption.toml")),
        "--format",
        "csv",
        "--output",
        path_str(&target),
    ]);
    assert!(stdout(&out).is_empty());
    let written = std::fs::read_to_string(&target).unwrap();
    assert!(written.starts_with("period,action,"));
}

#[test]
fn output_section_in_scenario_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.json");
    let text = format!(
        "{}\n[output]\nformat = \"json\"\npath = {:?}\n",
        std::fs::read_to_string(scenario("binary_choice.toml")).unwrap(),
        path_str(&target)
    );
    let src = dir.path().join("s.toml");
    std::fs::write(&src, text).unwrap();
    let out = cli(&["run", path_str(&src)]);
    assert!(stdout(&out).is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(v["command"], "run");
}

#[test]
fn embedded_scenario_round_trips_for_every_canonical_file() {
    let commands = [
        Cmd::Run,
        Cmd::CheckConsistency,
        Cmd::FindReversal,
        Cmd::Dilate,
        Cmd::CloneCompare,
        Cmd::CompareAgents,
    ];
    let json = OutputOverride {
        format: Some(OutputFormat::Json),
        path: None,
    };
    for entry in std::fs::read_dir(crate_dir().join("scenarios")).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let original = parse_scenario(&text).unwrap();
        for command in &commands {
            let Ok(rendered) = process(command, &text, &json) else {
                continue;
            };
            let v: serde_json::Value = serde_json::from_str(&rendered.text).unwrap();
            let embedded = serde_json::to_string(&v["scenario"]).unwrap();
            let mut reparsed = parse_scenario(&embedded).unwrap();
            assert_eq!(reparsed.output.format, OutputFormat::Json);
            reparsed.output = original.output.clone();
            assert_eq!(reparsed, original, "{}", path.display());
            // the embedded form is a fixed point
            let again = process(command, &embedded, &json).unwrap();
            assert_eq!(again.text, rendered.text, "{}", path.display());
        }
    }
}

#[test]
fn help_lists_every_subcommand() {
    let out = cli(&["--help"]);
    let text = stdout(&out);
    for sub in [
        "run",
        "choose",
        "check-consistency",
        "find-reversal",
        "dilate",
        "clone-compare",
        "compare-agents",
    ] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}
