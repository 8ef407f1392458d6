use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chronopref_cli::{process, CliError, Command, ErrorCode, OutputFormat, OutputOverride};

/// Simulate and analyse agents with time-inconsistent discounting.
///
/// Every subcommand reads one scenario file (TOML, or JSON when it starts
/// with `{`). Exit status: 0 on success, 2 when the scenario is malformed or
/// invalid, 3 when a command fails while running.
#[derive(Parser)]
#[command(name = "chronopref", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct Common {
    /// Scenario file.
    scenario: PathBuf,
    /// Report format; overrides `output.format` in the scenario.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout; overrides `output.path`.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Sub {
    /// Simulate the scenario's agent on its problem (a binary choice is
    /// evaluated from each vantage).
    Run(Common),
    /// Evaluate the binary choice from each vantage.
    Choose {
        #[command(flatten)]
        common: Common,
        /// Vantage period; repeat to list several. Replaces `problem.vantages`.
        #[arg(long)]
        vantage: Vec<u32>,
    },
    /// Test the discount function for time consistency.
    CheckConsistency(Common),
    /// Search the `[reversal]` grid for a preference reversal.
    FindReversal(Common),
    /// Proper time along the `[relativity]` itineraries.
    Dilate(Common),
    /// Evaluate the probe (or search for one) from both reunited clones.
    CloneCompare(Common),
    /// Run all four agent kinds on the problem and compare their paths.
    CompareAgents(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Sub::Run(c) => (Command::Run, c),
        Sub::Choose { common, vantage } => (
            Command::Choose {
                vantages: (!vantage.is_empty()).then_some(vantage),
            },
            common,
        ),
        Sub::CheckConsistency(c) => (Command::CheckConsistency, c),
        Sub::FindReversal(c) => (Command::FindReversal, c),
        Sub::Dilate(c) => (Command::Dilate, c),
        Sub::CloneCompare(c) => (Command::CloneCompare, c),
        Sub::CompareAgents(c) => (Command::CompareAgents, c),
    };
    match run(&command, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code.exit_status() as u8)
        }
    }
}

fn run(command: &Command, common: Common) -> Result<(), CliError> {
    let io = |what: String| {
        move |e: std::io::Error| CliError::new(ErrorCode::Io, format!("{what}: {e}"))
    };
    let text = std::fs::read_to_string(&common.scenario)
        .map_err(io(format!("cannot read {}", common.scenario.display())))?;
    let overrides = OutputOverride {
        format: common.format.map(|f| match f {
            Format::Table => OutputFormat::Table,
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }),
        path: common.output,
    };
    let rendered = process(command, &text, &overrides)?;
    match rendered.destination {
        Some(path) => std::fs::write(&path, rendered.text)
            .map_err(io(format!("cannot write {}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(rendered.text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(io("cannot write to stdout".into()))
        }
    }
}
