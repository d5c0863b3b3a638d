use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qpfe_core::acceptance::run_all;
use qpfe_core::protocol::Mode;
use qpfe_core::scenario::{list_scenarios, run_scenario, LoadedScenario};

const EXIT_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "qpfe", version, about = "Quantum private function evaluation workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write its JSON report
    Run(RunArgs),
    /// List built-in scenario kinds
    List,
    /// Run the acceptance suite
    Selftest,
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shots: Option<u64>,
    /// Report path; stdout when neither this nor the config's `out` is set
    #[arg(long)]
    out: Option<PathBuf>,
    /// Line-delimited event log of every recorded transcript
    #[arg(long)]
    transcripts: Option<PathBuf>,
    #[arg(long, conflicts_with = "sampled")]
    exact: bool,
    #[arg(long)]
    sampled: bool,
}

fn write_to(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn run(args: RunArgs) -> ExitCode {
    let mut loaded = match LoadedScenario::load(&args.config) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("qpfe: {}: {e}", args.config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let cfg = &mut loaded.config;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(s) = args.shots {
        cfg.shots = Some(s);
    }
    if args.exact {
        cfg.method = Some(Mode::Exact);
    } else if args.sampled {
        cfg.method = Some(Mode::Sampled);
    }
    let base = args.config.parent().unwrap_or(Path::new("."));
    let out_path = args.out.clone().or_else(|| cfg.out.as_ref().map(|p| base.join(p)));
    let output = match run_scenario(&loaded) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("qpfe: {}: {e}", args.config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Err(e) = write_to(out_path.as_deref(), &output.report.to_json()) {
        eprintln!("qpfe: writing report: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    if let Some(p) = &args.transcripts {
        if let Err(e) = std::fs::write(p, output.transcript_log()) {
            eprintln!("qpfe: writing transcripts: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    for c in output.report.criteria.iter().filter(|c| !c.passed) {
        eprintln!("qpfe: criterion {} failed: {} > {}", c.name, c.value, c.tolerance);
    }
    if output.report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::List => {
            print!("{}", list_scenarios());
            ExitCode::SUCCESS
        }
        Command::Selftest => {
            let outcomes = run_all(|o| println!("{o}"));
            if outcomes.iter().all(|o| o.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAILED)
            }
        }
    }
}
