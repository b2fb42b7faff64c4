mod args;
mod cache;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Status;

/// Invalid user input detected by the front end itself.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_PARTIAL: u8 = 4;

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(core) = err.downcast_ref::<nni_validity::Error>() {
        return if core.is_numerical() {
            EXIT_NUMERICAL
        } else {
            EXIT_VALIDATION
        };
    }
    if err.downcast_ref::<Usage>().is_some() {
        return EXIT_VALIDATION;
    }
    1
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()?;
    }
    match &cli.command {
        Command::Evolve(a) => commands::evolve(a),
        Command::Deltaj(a) => commands::deltaj(a),
        Command::Alphac(a) => commands::alphac(a),
        Command::AlphacVsT(a) => commands::alphac_vs_t(a),
        Command::ArgmaxMap(a) => commands::argmax_map(a),
        Command::AVsNmax(a) => commands::a_vs_nmax(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Status::Complete) => ExitCode::SUCCESS,
        Ok(Status::Partial) => {
            eprintln!("warning: some results failed; see the status column and trailing # lines");
            ExitCode::from(EXIT_PARTIAL)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
