use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lindyn_cli::report::emit_report;
use lindyn_cli::runner::run_specs;
use lindyn_cli::selftest::all_criteria;
use lindyn_cli::spec::{validate_spec, FAMILIES};

/// Numerical laboratory for the linear dynamics of sets of operators.
#[derive(Parser)]
#[command(name = "lindyn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Run the experiments described by a JSON spec file.
    Run {
        /// Path to the spec document (one experiment object or an array).
        spec: PathBuf,
        /// Write the machine-readable JSON-lines report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in operator families.
    ListFamilies,
    /// Run the full acceptance suite.
    Selftest,
}

fn init_thread_pool() -> Result<(), String> {
    match std::env::var("LINDYN_THREADS") {
        Ok(value) => {
            let threads: usize = value
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or("LINDYN_THREADS must be a positive integer")?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .map_err(|e| format!("failed to configure thread pool: {e}"))
        }
        Err(_) => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(message) = init_thread_pool() {
        eprintln!("{message}");
        return ExitCode::from(2);
    }
    match cli.command {
        CliCommand::Run { spec, out } => run_command(&spec, out.as_deref()),
        CliCommand::ListFamilies => {
            for family in FAMILIES {
                println!("{family}");
            }
            ExitCode::SUCCESS
        }
        CliCommand::Selftest => {
            let binary = match std::env::current_exe() {
                Ok(path) => path,
                Err(e) => {
                    eprintln!("cannot locate own executable: {e}");
                    return ExitCode::FAILURE;
                }
            };
            let outcomes = all_criteria(&binary);
            let mut all_pass = true;
            for outcome in &outcomes {
                println!("{}", outcome.render());
                all_pass &= outcome.passed;
            }
            if all_pass {
                println!("selftest: all {} criteria passed", outcomes.len());
                ExitCode::SUCCESS
            } else {
                println!("selftest: FAILURES present");
                ExitCode::FAILURE
            }
        }
    }
}

fn run_command(spec_path: &std::path::Path, out: Option<&std::path::Path>) -> ExitCode {
    let text = match std::fs::read_to_string(spec_path) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("cannot read {}: {e}", spec_path.display());
            return ExitCode::from(2);
        }
    };
    let specs = match validate_spec(&text) {
        Ok(specs) => specs,
        Err(errors) => {
            for error in errors {
                eprintln!("{error}");
            }
            return ExitCode::from(2);
        }
    };
    let report = run_specs(&specs);
    if let Some(path) = out {
        if let Err(e) = emit_report(&report, path) {
            eprintln!("cannot write report to {}: {e}", path.display());
            return ExitCode::FAILURE;
        }
    }
    for (record, runtime) in report.records.iter().zip(&report.runtimes_ms) {
        let metrics: Vec<String> = record
            .metrics
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        println!(
            "{} family={} verdict={} {} ({} ms)",
            record.experiment,
            record.family,
            record.verdict,
            metrics.join(" "),
            runtime
        );
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
