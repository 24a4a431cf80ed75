use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use abphase_core::scenario::{
    emit, error_exit_code, exit_code, parse_scenario, run, Format, ScenarioConfig, Task,
};
use abphase_core::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Aharonov-Bohm phases, transition cocycles and charge sectors on finite covers.
#[derive(Parser)]
#[command(name = "abphase", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate sigma against the relations and check the cocycle identity.
    Check(Common),
    /// Trivialize the transition cocycle or report a witness loop.
    Trivialize(Common),
    /// Holonomies of generator loops and named loops.
    Holonomy(Common),
    /// Sector transporters: window cocycle, telescoping, topological components.
    Sector(Common),
    /// Transition amplitudes for the configured path pairs.
    Amplitude(Common),
    /// Classify the twisted sector as DHR or topological.
    Classify(Common),
    /// Run every task listed in the scenario (all tasks by default).
    Report(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Structured,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides every tolerance in the scenario.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Command {
    fn parts(&self) -> (Option<Task>, &Common) {
        match self {
            Command::Check(c) => (Some(Task::Check), c),
            Command::Trivialize(c) => (Some(Task::Trivialize), c),
            Command::Holonomy(c) => (Some(Task::Holonomy), c),
            Command::Sector(c) => (Some(Task::Sector), c),
            Command::Amplitude(c) => (Some(Task::Amplitude), c),
            Command::Classify(c) => (Some(Task::Classify), c),
            Command::Report(c) => (None, c),
        }
    }
}

fn load(task: Option<Task>, args: &Common) -> Result<ScenarioConfig, Error> {
    let mut config = parse_scenario(&args.scenario)?;
    if let Some(t) = task {
        config.tasks = vec![t];
    }
    if let Some(seed) = args.seed {
        config.seed = Some(seed);
    }
    if let Some(tol) = args.tolerance {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::Schema {
                field: "--tolerance".into(),
                message: "must be positive and finite".into(),
            });
        }
        config.tolerances.override_all(tol);
    }
    Ok(config)
}

fn write_report(report: &abphase_core::scenario::Report, args: &Common) -> Result<(), Error> {
    let format = match args.format {
        OutputFormat::Text => Format::Text,
        OutputFormat::Structured => Format::Structured,
    };
    match &args.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            emit(report, format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            emit(report, format, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (task, args) = cli.command.parts();
    let config = match load(task, args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("abphase: {e}");
            return ExitCode::from(error_exit_code(&e) as u8);
        }
    };
    let result = run(&config);
    let code = exit_code(&result);
    match &result {
        Ok(report) => {
            if let Err(e) = write_report(report, args) {
                eprintln!("abphase: {e}");
                return ExitCode::from(error_exit_code(&e) as u8);
            }
            for t in report.tasks.iter().filter(|t| t.message.is_some()) {
                eprintln!("abphase: {}: {}", t.task, t.message.as_deref().unwrap_or_default());
            }
        }
        Err(e) => eprintln!("abphase: {e}"),
    }
    ExitCode::from(code as u8)
}
