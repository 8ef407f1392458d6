//! Scenario-driven command-line front end for `chronopref`.
//!
//! The binary is a thin wrapper around [`process`]: read a scenario file,
//! run one command on it, render the report. Errors carry an
//! [`ErrorCode`] whose [`ErrorCode::exit_status`] is the process exit status.

pub mod commands;
pub mod error;
pub mod report;
pub mod scenario;

use std::path::{Path, PathBuf};

pub use commands::{execute, Command};
pub use error::{CliError, ErrorCode};
pub use report::Report;
pub use scenario::{parse_scenario, OutputFormat, Scenario, ScenarioFile};

/// Command-line overrides of the scenario's `[output]` section.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OutputOverride {
    pub format: Option<OutputFormat>,
    pub path: Option<PathBuf>,
}

/// A fully rendered report and where it should go (`None` is stdout).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub text: String,
    pub destination: Option<PathBuf>,
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::new(
            ErrorCode::Io,
            format!("cannot read {}: {e}", path.display()),
        )
    })?;
    parse_scenario(&text)
}

/// Parses, runs and renders. Nothing is written anywhere.
pub fn process(
    command: &Command,
    scenario_text: &str,
    overrides: &OutputOverride,
) -> Result<Rendered, CliError> {
    let mut scenario = parse_scenario(scenario_text)?;
    if let Some(format) = overrides.format {
        scenario.output.format = format;
    }
    if let Some(path) = &overrides.path {
        scenario.output.path = Some(path.display().to_string());
    }
    let report = execute(command, &scenario)?;
    Ok(Rendered {
        text: report.render(scenario.output.format)?,
        destination: scenario.output.path.as_ref().map(PathBuf::from),
    })
}
