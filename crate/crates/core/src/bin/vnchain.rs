//! Command-line runner for premeasurement-chain scenarios.

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use vnchain::scenario::{self, Format, RunOptions, Scenario, BUILTINS};
use vnchain::verify::{self, Corruption, VerifyOptions};

const EXIT_VALIDATION: u8 = 1;
const EXIT_FAILURE: u8 = 2;

#[derive(Parser)]
#[command(name = "vnchain", version, about = "Simulate unitary premeasurement chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a builtin scenario.
    Run {
        /// Path to a JSON scenario or the name of a builtin.
        scenario: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
        /// Include the global state after every stage.
        #[arg(long)]
        dump_states: bool,
        /// Pass threshold of the condition checks.
        #[arg(long, env = "VNCHAIN_TOL")]
        tol: Option<f64>,
    },
    /// Run the randomised property suites.
    Verify {
        /// Largest object and instrument dimensions of the grid.
        #[arg(long, value_parser = parse_dims, default_value = "4,6")]
        dims: (usize, usize),
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fault injection mode: none or phase.
        #[arg(long, default_value = "none")]
        corrupt: Corruption,
        /// Worker threads for independent cases.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Builtin scenarios.
    Scenarios {
        #[command(subcommand)]
        action: ScenariosAction,
    },
    /// Print the document of a builtin scenario.
    Emit { builtin: String },
}

#[derive(Subcommand)]
enum ScenariosAction {
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Tsv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Text => Format::Text,
            OutputFormat::Tsv => Format::Tsv,
            OutputFormat::Json => Format::Json,
        }
    }
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected A,B")?;
    let a: usize = a.trim().parse().map_err(|_| format!("bad object dimension `{a}`"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("bad instrument dimension `{b}`"))?;
    Ok((a, b))
}

fn load(source: &str) -> Result<Scenario, String> {
    let text = match scenario::builtin(source) {
        Some(doc) => doc.to_string(),
        None => std::fs::read_to_string(source)
            .map_err(|e| format!("`{source}` is neither a builtin nor a readable file: {e}"))?,
    };
    scenario::parse_scenario(&text).map_err(|e| format!("{source}: {e}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_VALIDATION } else { 0 });
        }
    };
    match cli.command {
        Command::Run {
            scenario: source,
            seed,
            format,
            dump_states,
            tol,
        } => {
            let scenario = match load(&source) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(EXIT_VALIDATION);
                }
            };
            let mut options = RunOptions {
                seed,
                dump_states,
                ..RunOptions::default()
            };
            if let Some(tol) = tol {
                if !(tol.is_finite() && tol >= 0.0) {
                    eprintln!("--tol must be a non-negative number");
                    return ExitCode::from(EXIT_VALIDATION);
                }
                options.tolerance = tol;
            }
            match scenario::run(&scenario, &options) {
                Ok(report) => {
                    print!("{}", report.render(format.into()));
                    if report.passed() {
                        ExitCode::SUCCESS
                    } else {
                        eprintln!("numerical check failed");
                        ExitCode::from(EXIT_FAILURE)
                    }
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(EXIT_FAILURE)
                }
            }
        }
        Command::Verify {
            dims,
            trials,
            seed,
            corrupt,
            jobs,
            format,
        } => {
            let report = verify::verify(&VerifyOptions {
                max_object_dim: dims.0,
                max_instrument_dim: dims.1,
                trials,
                seed,
                corrupt,
                jobs,
            });
            match format {
                OutputFormat::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
                _ => print!("{}", report.render_text()),
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Command::Scenarios {
            action: ScenariosAction::List,
        } => {
            for (name, doc) in BUILTINS {
                let description = serde_json::from_str::<scenario::ScenarioDoc>(doc)
                    .ok()
                    .and_then(|d| d.description)
                    .unwrap_or_default();
                println!("{name:<16} {description}");
            }
            ExitCode::SUCCESS
        }
        Command::Emit { builtin } => match scenario::builtin(&builtin) {
            Some(doc) => {
                print!("{doc}");
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("unknown builtin `{builtin}`; see `vnchain scenarios list`");
                ExitCode::from(EXIT_VALIDATION)
            }
        },
    }
}
