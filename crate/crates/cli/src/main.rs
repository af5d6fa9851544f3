use clap::{Args, Parser, Subcommand, ValueEnum};
use moltrap_cli::fixture::{self, FixtureError, Profile};
use moltrap_cli::run::{run_scenario, RunContext, RunError, RunOutput};
use moltrap_cli::scenario::{parse_scenario, Scenario, ScenarioKind};
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_FIXTURE: u8 = 4;

#[derive(Parser)]
#[command(name = "moltrap", version, about = "Single-molecule magnetic resonance in ion and optical traps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive trap parameters from a derive_ion or derive_optical scenario.
    Derive(RunArgs),
    /// Simulate mechanical readout of one spin.
    Readout(RunArgs),
    /// Run the gradient-inversion protocol over a spin lattice.
    Protocol(RunArgs),
    /// Run a register circuit program.
    Circuit(RunArgs),
    /// Run every shipped reference fixture and print the pass/fail table.
    VerifyPaper {
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long = "tolerance-profile", value_enum, default_value_t = ToleranceProfile::Paper)]
        tolerance_profile: ToleranceProfile,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Overrides the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for report.txt, report.json and trajectory.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ToleranceProfile {
    Paper,
    Strict,
}

struct Failure {
    code: u8,
    kind: &'static str,
    messages: Vec<serde_json::Value>,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_VALIDATION,
            kind: "validation",
            messages: vec![json!({ "message": message.into() })],
        }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Validation(m) => Failure::validation(m),
            RunError::Numeric(m) => Failure {
                code: EXIT_NUMERIC,
                kind: "numeric",
                messages: vec![json!({ "message": m })],
            },
        }
    }
}

fn load(path: &Path, allowed: &[ScenarioKind]) -> Result<Scenario, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::validation(format!("cannot read scenario {}: {e}", path.display())))?;
    let scenario = parse_scenario(&text).map_err(|errors| Failure {
        code: EXIT_VALIDATION,
        kind: "validation",
        messages: errors
            .iter()
            .map(|e| json!({ "line": e.line, "message": e.to_string() }))
            .collect(),
    })?;
    if !allowed.contains(&scenario.kind) {
        let names: Vec<&str> = allowed.iter().map(|k| k.name()).collect();
        return Err(Failure::validation(format!(
            "scenario kind {} does not match this subcommand (expected {})",
            scenario.kind.name(),
            names.join(" or ")
        )));
    }
    Ok(scenario)
}

fn write_outputs(dir: &Path, out: &RunOutput) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.txt"), out.render_table())?;
    fs::write(dir.join("report.json"), out.render_json())?;
    if let Some(traj) = &out.trajectory {
        let file = fs::File::create(dir.join("trajectory.csv"))?;
        traj.write_delimited(std::io::BufWriter::new(file))?;
    }
    Ok(())
}

fn run(args: &RunArgs, allowed: &[ScenarioKind]) -> Result<(), Failure> {
    let scenario = load(&args.scenario, allowed)?;
    let ctx = RunContext {
        base_dir: args.scenario.parent().map(Path::to_path_buf),
        seed: args.seed,
    };
    let out = run_scenario(&scenario, &ctx)?;
    if let Some(dir) = &args.out {
        write_outputs(dir, &out).map_err(|e| Failure::validation(format!("cannot write to {}: {e}", dir.display())))?;
    }
    match args.format {
        Format::Table => print!("{}", out.render_table()),
        Format::Json => print!("{}", out.render_json()),
    }
    Ok(())
}

fn verify(format: Format, profile: ToleranceProfile) -> Result<(), Failure> {
    let profile = match profile {
        ToleranceProfile::Paper => Profile::Paper,
        ToleranceProfile::Strict => Profile::Strict,
    };
    let comparisons = fixture::verify_all(profile).map_err(|e| match e {
        FixtureError::Scenario { source, .. } => Failure::from(source),
        other => Failure {
            code: EXIT_FIXTURE,
            kind: "fixture",
            messages: vec![json!({ "message": other.to_string() })],
        },
    })?;
    match format {
        Format::Table => print!("{}", fixture::render_table(&comparisons)),
        Format::Json => print!("{}", fixture::render_json(&comparisons)),
    }
    let failed: Vec<serde_json::Value> = comparisons
        .iter()
        .flat_map(|c| c.failures().into_iter().map(move |k| json!({ "fixture": c.fixture, "key": k })))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_FIXTURE,
            kind: "fixture_mismatch",
            messages: failed,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Derive(a) => run(a, &[ScenarioKind::DeriveIon, ScenarioKind::DeriveOptical]),
        Command::Readout(a) => run(a, &[ScenarioKind::Readout]),
        Command::Protocol(a) => run(a, &[ScenarioKind::Protocol]),
        Command::Circuit(a) => run(a, &[ScenarioKind::Circuit]),
        Command::VerifyPaper {
            format,
            tolerance_profile,
        } => verify(*format, *tolerance_profile),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", json!({ "error": f.kind, "details": f.messages }));
            ExitCode::from(f.code)
        }
    }
}
