use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fockline_cli::{load_config, run, validate, RunOptions, EXIT_CONFIG, EXIT_OK};

#[derive(Parser)]
#[command(
    name = "fockline",
    version,
    about = "Single-photon linear-optics experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Directory for the artifacts, overriding `output.path`.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write the prepared state as `<experiment>.state.json`.
        #[arg(long)]
        dump_state: bool,
    },
    /// Check a config file without running it.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            output,
            dump_state,
        } => {
            let cfg = match load_config(&config) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            let plan = match cfg.resolve() {
                Ok(plan) => plan,
                Err(violations) => {
                    for v in violations {
                        eprintln!("config error: {v}");
                    }
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            let options = RunOptions {
                output_dir: output,
                dump_state,
            };
            match run(&plan, &options) {
                Ok(report) => {
                    for f in report.files {
                        println!("{}", f.display());
                    }
                    ExitCode::from(EXIT_OK)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code())
                }
            }
        }
        Command::Validate { config } => {
            let cfg = match load_config(&config) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            let violations = validate(&cfg);
            if violations.is_empty() {
                println!("ok");
                ExitCode::from(EXIT_OK)
            } else {
                for v in &violations {
                    println!("{v}");
                }
                ExitCode::from(EXIT_CONFIG)
            }
        }
    }
}
