mod args;
mod commands;
mod settings;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// A problem with how the command was invoked rather than with its inputs.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

// Exit codes; clap itself exits with 2 on unknown flags.
const EXIT_OTHER: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_FORMAT: u8 = 4;
const EXIT_INVALID: u8 = 5;
const EXIT_MISALIGNED: u8 = 6;
const EXIT_DIVERGED: u8 = 7;
const EXIT_MODEL: u8 = 8;

fn exit_code(err: &anyhow::Error) -> u8 {
    use occner::Error as E;
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    if let Some(e) = err.downcast_ref::<E>() {
        return match e {
            E::Io { .. } | E::Stream(_) => EXIT_IO,
            E::Format { .. } | E::IllegalSequence { .. } => EXIT_FORMAT,
            E::Empty(_) | E::InvalidArgument(_) | E::Dimension { .. } | E::Undefined(_) => {
                EXIT_INVALID
            }
            E::Misaligned(_) => EXIT_MISALIGNED,
            E::Diverged { .. } => EXIT_DIVERGED,
            E::Model(_) => EXIT_MODEL,
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return EXIT_IO;
    }
    EXIT_OTHER
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Causes already quoted by their parent message are skipped.
            let mut line = String::new();
            for cause in e.chain().map(|c| c.to_string()) {
                if !line.contains(&cause) {
                    if !line.is_empty() {
                        line.push_str(": ");
                    }
                    line.push_str(&cause);
                }
            }
            let line = line.replace('\n', " ");
            eprintln!("occner: error: {line}");
            ExitCode::from(exit_code(&e))
        }
    }
}
