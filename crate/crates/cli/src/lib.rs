//! The `bhadv` command line: experiment subcommands writing CSV and JSON
//! reports plus a manifest per run.

pub mod args;
pub mod commands;
pub mod error;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use args::{Cli, Command};
pub use error::{CliError, Result};

pub fn run(cli: &Cli, stdout: &mut (dyn Write + Send)) -> Result<()> {
    match cli.threads {
        None => dispatch(&cli.command, stdout),
        Some(0) => Err(CliError::usage("--threads must be at least 1")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::usage(format!("thread pool: {e}")))?
            .install(|| dispatch(&cli.command, stdout)),
    }
}

fn dispatch(command: &Command, stdout: &mut (dyn Write + Send)) -> Result<()> {
    match command {
        Command::Simulate(a) => commands::simulate(a, stdout),
        Command::Bound(a) => commands::bound(a, stdout),
        Command::Qsweep(a) => commands::qsweep(a, stdout),
        Command::Conformal(a) => commands::conformal(a, stdout),
        Command::Attack(a) => commands::attack(a, stdout),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(stdout, "{}", e.render());
            return 0;
        }
        Err(e) => {
            let text = e.render().to_string();
            let line: Vec<&str> = text
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            let _ = writeln!(stderr, "{}", line.join(" "));
            return 2;
        }
    };
    match run(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
