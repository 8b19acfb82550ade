use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use holostat::gallery::catalog;
use holostat::report::{report_schema, run, Overrides, RunConfig, RunError, RunReport, Status, Suite, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "holostat", version, about = "Verification suites for statistical manifolds and CR-statistical submanifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct Flags {
    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the points per axis of immersion grids.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Override the finite-difference step.
    #[arg(long = "fd-step", global = true)]
    fd_step: Option<f64>,
    /// Use one tolerance for every suite.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress the per-suite summary on standard error.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print the gallery catalog.
    List,
    /// Run the suites listed in a configuration file.
    Verify { config: PathBuf },
    /// Run only the Ricci-inequality suite of a configuration file.
    ChenRicci { config: PathBuf },
    /// Print the JSON Schema of the report.
    ReportSchema,
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), RunError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| RunError::Config(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| RunError::Config(format!("cannot write to standard output: {e}"))),
    }
}

fn summarize(report: &RunReport) {
    for s in &report.suites {
        let status = match s.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Skipped => "skipped",
        };
        let reason = s.reason.map(|r| format!(" ({})", r.code())).unwrap_or_default();
        eprintln!(
            "{:<16} {status}{reason}: {} pass, {} fail, {} skipped",
            s.suite.id(),
            s.summary.pass_count,
            s.summary.fail_count,
            s.summary.skip_count
        );
    }
}

fn verify(path: &Path, flags: &Flags, only: Option<Suite>) -> Result<i32, RunError> {
    let mut config = RunConfig::load(path)?;
    if let Some(suite) = only {
        config.suites = vec![suite];
    }
    config.apply(&Overrides { seed: flags.seed, grid: flags.grid, fd_step: flags.fd_step, tol: flags.tol })?;
    let report = run(&config)?;
    emit(flags.out.as_deref(), &report.render())?;
    if !flags.quiet {
        summarize(&report);
    }
    Ok(report.exit_code())
}

fn execute(cli: &Cli) -> Result<i32, RunError> {
    let flags = &cli.flags;
    match &cli.command {
        Command::List => {
            let text: String = catalog().into_iter().map(|(id, desc)| format!("{id:<18} {desc}\n")).collect();
            emit(flags.out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Verify { config } => verify(config, flags, None),
        Command::ChenRicci { config } => verify(config, flags, Some(Suite::ChenRicci)),
        Command::ReportSchema => {
            let mut text = serde_json::to_string_pretty(&report_schema()).expect("schema is valid JSON");
            text.push('\n');
            emit(flags.out.as_deref(), &text)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = execute(&cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
