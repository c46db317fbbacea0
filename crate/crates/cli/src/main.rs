use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use scramble_cli::commands;
use scramble_cli::CliError;

/// Operator scrambling and its bounds in the spin-star model.
#[derive(Parser, Debug)]
#[command(name = "scramble", version)]
struct Cli {
    /// Worker threads; 0 or unset uses every available core.
    #[arg(long, env = "SCRAMBLE_THREADS", global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario from a TOML config and write its CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, hide = true, default_value_t = 1.0, allow_negative_numbers = true)]
        tolerance_scale: f64,
    },
    /// Check the invariant suite on one preset or on all of them.
    Verify {
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, hide = true, default_value_t = 1.0, allow_negative_numbers = true)]
        tolerance_scale: f64,
    },
    /// Print the preset catalog.
    List,
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads.filter(|&n| n > 0) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(CliError::Config(format!("threads: {e}")));
        }
    }
    match cli.command {
        Command::Run { config, tolerance_scale } => match commands::run(&config, tolerance_scale) {
            Ok(s) => {
                println!(
                    "wrote {} rows to {} ({} with undefined bounds); metadata in {}",
                    s.rows,
                    s.output.display(),
                    s.undefined,
                    s.metadata.display()
                );
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Verify { scenario, tolerance_scale } => match commands::verify_command(scenario.as_deref(), tolerance_scale) {
            Ok(report) => {
                print!("{}", report.render());
                if report.passed() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(2)
                }
            }
            Err(e) => fail(e),
        },
        Command::List => {
            for line in commands::list() {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
    }
}
