//! `metarep` command-line entry point.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O error, 3 validation error.

use std::fs;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use metarep_core::pipeline::ScoringTables;
use metarep_core::report::{self, ReportError};
use metarep_core::risk::{self, RiskError};
use metarep_core::sim::{self, GeneratorKind, SimConfig, SimError, DEFAULT_SEED, DEFAULT_STEPS};

#[derive(Debug, Parser)]
#[command(name = "metarep", version, about = "Trust scoring simulation and OWASP risk rating")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the message-stream simulation and write result CSVs.
    Simulate(SimulateArgs),
    /// Score every possible message combination once.
    Enumerate(EnumerateArgs),
    /// Rebuild the classification report from a result CSV.
    Report(ReportArgs),
    /// Assess threat ratings from a CSV.
    Risk(RiskArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    steps: u64,
    /// Comma-separated: random, random-good, random-bad, fifty-fifty, enumerate-all
    #[arg(long, value_delimiter = ',', default_value = "random,random-good,random-bad,fifty-fifty")]
    generators: Vec<String>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Also write the summary to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RiskArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Assessed CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn io(context: &str, err: impl std::fmt::Display) -> Self {
        Failure {
            code: 2,
            message: format!("{context}: {err}"),
        }
    }

    fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
}

fn csv_failure(context: &str, err: csv::Error) -> Failure {
    if matches!(err.kind(), csv::ErrorKind::Io(_)) {
        Failure::io(context, err)
    } else {
        Failure::validation(format!("{context}: {err}"))
    }
}

impl From<SimError> for Failure {
    fn from(err: SimError) -> Self {
        match err {
            SimError::InvalidConfig(_) | SimError::UnknownGenerator(_) => {
                Failure::usage(err.to_string())
            }
            SimError::NoConsumers | SimError::RejectionLimit { .. } => {
                Failure::validation(err.to_string())
            }
        }
    }
}

fn report_failure(context: &str, err: ReportError) -> Failure {
    match err {
        ReportError::Io(e) => Failure::io(context, e),
        ReportError::Csv(e) => csv_failure(context, e),
        ReportError::Empty | ReportError::Schema { .. } => {
            Failure::validation(format!("{context}: {err}"))
        }
    }
}

fn risk_failure(context: &str, err: RiskError) -> Failure {
    match err {
        RiskError::Io(e) => Failure::io(context, e),
        RiskError::Csv(e) => csv_failure(context, e),
        other => Failure::validation(format!("{context}: {other}")),
    }
}

fn open(path: &Path) -> Result<BufReader<fs::File>, Failure> {
    fs::File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::io(&path.display().to_string(), e))
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let generators = args
        .generators
        .iter()
        .map(|g| g.trim().parse::<GeneratorKind>())
        .collect::<Result<Vec<_>, _>>()?;
    let config = SimConfig {
        seed: args.seed,
        steps: args.steps,
        generators,
        tables: ScoringTables::default(),
    };
    run_and_write(&config, &args.out)
}

fn run_and_write(config: &SimConfig, out: &Path) -> Result<(), Failure> {
    config.validate()?;
    let records = sim::run_simulation(config)?;
    let context = out.display().to_string();
    let files = report::write_results(out, &records).map_err(|e| report_failure(&context, e))?;
    for f in &files {
        eprintln!("wrote {}", f.display());
    }
    let summary = report::render_summary(&records).map_err(|e| report_failure(&context, e))?;
    emit(summary.as_bytes())?;
    Ok(())
}

fn enumerate(args: EnumerateArgs) -> Result<(), Failure> {
    run_and_write(&SimConfig::enumeration(), &args.out)
}

fn report_cmd(args: ReportArgs) -> Result<(), Failure> {
    let context = args.input.display().to_string();
    let records = report::read_csv(open(&args.input)?, &ScoringTables::default())
        .map_err(|e| report_failure(&context, e))?;
    let summary = report::render_summary(&records).map_err(|e| report_failure(&context, e))?;
    if let Some(out) = &args.out {
        fs::write(out, &summary).map_err(|e| Failure::io(&out.display().to_string(), e))?;
    }
    emit(summary.as_bytes())?;
    Ok(())
}

fn risk_cmd(args: RiskArgs) -> Result<(), Failure> {
    let context = args.input.display().to_string();
    let ratings = risk::read_ratings(open(&args.input)?).map_err(|e| risk_failure(&context, e))?;
    match &args.out {
        Some(path) => {
            let context = path.display().to_string();
            let file = fs::File::create(path).map_err(|e| Failure::io(&context, e))?;
            risk::write_assessments(&ratings, BufWriter::new(file))
                .map_err(|e| risk_failure(&context, e))?;
        }
        None => {
            let mut buf = Vec::new();
            risk::write_assessments(&ratings, &mut buf).map_err(|e| risk_failure("stdout", e))?;
            emit(&buf)?;
        }
    }
    Ok(())
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(bytes: &[u8]) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    match out.write_all(bytes).and_then(|()| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::io("stdout", e)),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Enumerate(a) => enumerate(a),
        Command::Report(a) => report_cmd(a),
        Command::Risk(a) => risk_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("metarep: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
