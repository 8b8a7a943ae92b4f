//! Batch front-end for section pursuit: CSV ingestion, run manifests and
//! SVG, JSON and CSV outputs.

pub mod args;
pub mod error;
pub mod ingest;
pub mod run;
pub mod svg;

use std::ffi::OsString;

use clap::Parser;

use crate::args::{Action, Cli};
use crate::error::EXIT_CONFIG;

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = cli.command.into_action().and_then(|action| match action {
        Action::Run { config, out_dir } => run::execute(&config, &out_dir),
        Action::Replay { manifest, out_dir } => run::replay(&manifest, &out_dir),
    });
    match result {
        Ok(output) => {
            if let Some(text) = output.stdout {
                print!("{text}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
