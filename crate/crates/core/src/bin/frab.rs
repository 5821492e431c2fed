use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use frab::harness::{builtin, run_experiment, ExperimentSpec, BUILTINS};
use frab::{Error, Result};

/// Benchmark runner for anchored forward-reflected-backward splitting.
#[derive(Parser)]
#[command(name = "frab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the builtin experiment names.
    List,
    /// Run a spec file or a builtin experiment.
    Run {
        /// Path to a spec file, or a builtin name.
        target: String,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        /// Comma-separated run labels or algorithm names to keep.
        #[arg(long, value_delimiter = ',')]
        algo: Vec<String>,
        /// Directory for trace and summary CSVs.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write every iterate.
        #[arg(long)]
        trace: bool,
    },
    /// Check a spec file without running it.
    Validate { file: PathBuf },
}

fn load(target: &str) -> Result<ExperimentSpec> {
    if let Some(spec) = builtin(target) {
        return Ok(spec);
    }
    let path = PathBuf::from(target);
    if !path.exists() {
        return Err(Error::Usage(format!("{target:?} is neither a builtin experiment nor a readable file")));
    }
    std::fs::read_to_string(&path)?.parse()
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::List => {
            for name in BUILTINS {
                println!("{name}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { file } => {
            let spec: ExperimentSpec = std::fs::read_to_string(&file)?.parse()?;
            spec.validate()?;
            let built = spec.problem.build()?;
            for run in &spec.runs {
                spec.effective_config(run).validate_for(&built.problem)?;
            }
            println!("{}: {} runs ok", file.display(), spec.runs.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { target, max_iter, tol, algo, out, trace } => {
            let mut spec = load(&target)?;
            if let Some(m) = max_iter {
                spec.max_iter = m;
            }
            if let Some(t) = tol {
                spec.tol = t;
            }
            if !algo.is_empty() {
                spec.retain_runs(&algo);
            }
            if out.is_some() {
                spec.out = out;
            }
            spec.trace |= trace;
            let report = run_experiment(&spec)?;
            print!("{}", report.render());
            for f in &report.files {
                eprintln!("wrote {}", f.display());
            }
            Ok(if report.any_numerical_failure() { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
