use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use hotline_cli::catalog::{self, BUNDLED};
use hotline_cli::run::{execute, prepare};
use hotline_cli::scenario::{parse, Loaded};
use hotline_cli::{CliError, EXIT_CHECK_FAILED};
use log::info;

/// Scenario runner for hot-line qubit networks: writes CSV tables and a JSON
/// summary per run.
#[derive(Parser)]
#[command(name = "hotline", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a bundled scenario by name.
    Run {
        scenario: String,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for parameter sweeps (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory (default: the scenario's output_dir, else out/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Treat warnings as check failures.
        #[arg(long)]
        strict: bool,
    },
    /// List the bundled scenarios.
    List,
    /// Check scenario files (or bundled names) against the schema without running.
    Validate {
        #[arg(required = true)]
        scenarios: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(arg: &str) -> Result<Loaded, CliError> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(b) = catalog::find(arg) {
            return Ok(Loaded { scenario: b.scenario()?, base_dir: PathBuf::from(".") });
        }
        return Err(CliError::Io(format!("no scenario file or bundled scenario named {arg:?}")));
    }
    let text = std::fs::read_to_string(path)?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    Ok(Loaded { scenario: parse(&text)?, base_dir })
}

fn run(arg: &str, seed: Option<u64>, threads: Option<usize>, out: Option<PathBuf>, strict: bool) -> Result<u8, CliError> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Schema("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    }
    let loaded = load(arg)?;
    let s = &loaded.scenario;
    let dir = out
        .or_else(|| s.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&s.name));
    let start = Instant::now();
    let outcome = execute(&loaded, seed)?;
    outcome.write(&dir)?;
    let secs = start.elapsed().as_secs_f64();
    info!("{} finished in {secs:.1} s", s.name);
    if let Some(b) = s.budget_s {
        if secs > b {
            eprintln!("note: {} took {secs:.1} s, over its {b} s budget", s.name);
        }
    }
    let a = &outcome.artifacts;
    for w in &a.warnings {
        eprintln!("warning: {w}");
    }
    for c in &a.checks {
        println!("{} {}: {:e} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.threshold);
    }
    println!("wrote {} file(s) to {}", outcome.files.len(), dir.display());
    if !outcome.passed() || (strict && !a.warnings.is_empty()) {
        return Ok(EXIT_CHECK_FAILED);
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, seed, threads, out, strict } => run(&scenario, seed, threads, out, strict),
        Command::List => {
            for b in BUNDLED {
                match b.scenario() {
                    Ok(s) => println!("{:<9} {:<9} {}", b.name, s.kind.label(), s.description),
                    Err(e) => println!("{:<9} INVALID   {e}", b.name),
                }
            }
            Ok(0)
        }
        Command::Validate { scenarios, seed } => {
            let mut worst = 0;
            for arg in &scenarios {
                match load(arg).and_then(|l| prepare(&l, seed)) {
                    Ok(()) => println!("ok      {arg}"),
                    Err(e) => {
                        println!("invalid {arg}: {e}");
                        worst = worst.max(e.exit_code());
                    }
                }
            }
            Ok(worst)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
