use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use voi_lab::sim::{simulate_traced, SimConfig};
use voi_lab::{Admission, Discipline};
use voi_lab_cli::config::{self, ExperimentConfig};
use voi_lab_cli::experiment::{meta_text, resolve_seed, run_experiment, write_csv, RunError};
use voi_lab_cli::verify::{compare_engines, Verdict, DEFAULT_SIGMAS};
use voi_lab_cli::{presets, EXIT_NUMERIC, EXIT_USAGE, EXIT_VERIFY};

#[derive(Parser)]
#[command(name = "voi-lab", version, about = "Average Value of Information sweeps: analytics and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Experiment config file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset, see `preset list`.
    #[arg(long)]
    preset: Option<String>,
    /// Overrides the config and VOI_LAB_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Packets per simulation run.
    #[arg(long)]
    packets: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the grid and write CSV.
    Run {
        #[command(flatten)]
        source: Source,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Grid points evaluated concurrently.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Compare analytic rows of a CSV with their simulated counterparts.
    Verify {
        csv: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SIGMAS)]
        sigmas: f64,
    },
    /// Built-in presets.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
    /// Print the event trace of one simulated point, one line per event:
    /// time, kind, packet id, server state before the event.
    Trace {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        lambda: f64,
        /// Defaults to the first discipline of the config.
        #[arg(long)]
        discipline: Option<String>,
        /// Defaults to the first policy of the config.
        #[arg(long)]
        policy: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    Show { name: String },
}

enum Failure {
    Usage(String),
    Verify,
    Numeric(String),
    Other(String),
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Numeric { .. } => Failure::Numeric(e.to_string()),
            RunError::Invalid(msg) => Failure::Usage(msg),
            other => Failure::Other(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

fn load(source: &Source) -> Result<ExperimentConfig, Failure> {
    let mut config = match (&source.config, &source.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            config::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        (None, Some(name)) => presets::load(name)
            .ok_or_else(|| Failure::Usage(format!("unknown preset '{name}'; try `voi-lab preset list`")))?,
        (None, None) => return Err(Failure::Usage("either --config or --preset is required".into())),
    };
    if let Some(n) = source.packets {
        if n == 0 {
            return Err(Failure::Usage("--packets must be at least 1".into()));
        }
        config.n_packets = n;
    }
    Ok(config)
}

fn writer(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(source: &Source, out: Option<PathBuf>, jobs: Option<usize>) -> Result<(), Failure> {
    let config = load(source)?;
    let seed = resolve_seed(source.seed, &config)?;
    let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let out = out.or_else(|| config.output.clone());
    let rows = run_experiment(&config, seed, jobs)?;
    write_csv(&rows, writer(out.as_deref())?)?;
    if let Some(path) = out {
        let mut meta = path.into_os_string();
        meta.push(".meta");
        fs::write(&meta, meta_text(&config, seed))?;
    }
    Ok(())
}

fn verify(csv: &Path, sigmas: f64) -> Result<(), Failure> {
    let file = File::open(csv).map_err(|e| Failure::Usage(format!("{}: {e}", csv.display())))?;
    let summary = compare_engines(file, sigmas)?;
    for c in &summary.comparisons {
        println!("{c}");
    }
    println!(
        "{} passed, {} failed, {} skipped",
        summary.count(|v| *v == Verdict::Pass),
        summary.count(|v| *v == Verdict::Fail),
        summary.count(|v| matches!(v, Verdict::Skipped(_)))
    );
    if summary.passed() {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

fn trace(
    source: &Source,
    lambda: f64,
    discipline: Option<String>,
    policy: Option<String>,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let config = load(source)?;
    let seed = resolve_seed(source.seed, &config)?;
    let discipline = match discipline {
        Some(d) => d.parse::<Discipline>().map_err(|e| Failure::Usage(e.to_string()))?,
        None => config.disciplines[0],
    };
    let policy = match policy {
        Some(p) => p.parse::<Admission>().map_err(|e| Failure::Usage(e.to_string()))?,
        None => config.policies[0],
    };
    let scenario = config
        .template
        .instantiate(lambda, discipline, policy)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let mut w = writer(out.as_deref())?;
    let mut io_error = None;
    simulate_traced(&SimConfig::new(scenario, config.n_packets, seed), |e| {
        if io_error.is_none() {
            io_error = writeln!(w, "{e}").err();
        }
    })
    .map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(e) = io_error {
        return Err(e.into());
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { source, out, jobs } => run(&source, out, jobs),
        Command::Verify { csv, sigmas } => verify(&csv, sigmas),
        Command::Preset { action } => {
            match action {
                PresetAction::List => {
                    for p in presets::PRESETS {
                        println!("{:<26} {}", p.name, p.summary);
                    }
                    Ok(())
                }
                PresetAction::Show { name } => match presets::find(&name) {
                    Some(p) => {
                        print!("{}", p.text);
                        Ok(())
                    }
                    None => Err(Failure::Usage(format!("unknown preset '{name}'"))),
                },
            }
        }
        Command::Trace {
            source,
            lambda,
            discipline,
            policy,
            out,
        } => trace(&source, lambda, discipline, policy, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE as u8)
        }
        Err(Failure::Verify) => ExitCode::from(EXIT_VERIFY as u8),
        Err(Failure::Numeric(msg)) => {
            eprintln!("numeric failure: {msg}");
            ExitCode::from(EXIT_NUMERIC as u8)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
