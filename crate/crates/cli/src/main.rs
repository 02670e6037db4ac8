mod args;
mod commands;
mod output;
mod svg;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use args::Cli;

/// Failure of one invocation, carrying its exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(mixtopo::Error),
    /// Results were produced but failed their own cross-check.
    Numerical(String),
}

impl From<mixtopo::Error> for Failure {
    fn from(e: mixtopo::Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Core(e) if e.is_numerical() => 3,
            Failure::Core(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        let (kind, message) = match self {
            Failure::Usage(m) => ("UsageError", m.clone()),
            Failure::Core(e) => (e.kind(), e.to_string()),
            Failure::Numerical(m) => ("VerificationFailed", m.clone()),
        };
        json!({ "error": kind, "message": message, "exit_code": self.code() })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            let f = Failure::Usage(msg.trim().to_string());
            eprintln!("{}", f.to_json());
            return ExitCode::from(f.code());
        }
    };
    match commands::run(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.code())
        }
    }
}
