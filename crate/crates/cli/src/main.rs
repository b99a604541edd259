#![allow(clippy::neg_cmp_op_on_partial_ord)]

/// `println!` that stops quietly when stdout is closed, as with `| head`.
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

mod args;
mod commands;
mod error;
mod io;
mod manifest;
mod prior;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::{CliError, CliResult};
use io::Output;
use manifest::Manifest;

fn dispatch(command: &Command, out: &Output, manifest: &mut Manifest) -> CliResult<()> {
    match command {
        Command::Sg(c) => commands::sg::run(c, out),
        Command::Partition(c) => commands::partition::run(c, out),
        Command::Simulate(c) => commands::simulate::run(c, out),
        Command::FitMixture(a) => commands::fit_mixture::run(a, out, manifest),
        Command::FitSbm(a) => commands::fit_sbm::run(a, out, manifest),
        Command::Replay(_) => Err(CliError::Usage(
            "a manifest cannot replay another replay".into(),
        )),
    }
}

fn execute(argv: Vec<String>, output_dir: &Path, command: Command) -> CliResult<()> {
    let (command, replayed_from) = match command {
        Command::Replay(r) => (
            Manifest::load(&r.manifest)?.command,
            Some(r.manifest.display().to_string()),
        ),
        c => (c, None),
    };
    let out = Output::new(output_dir)?;
    let mut manifest = Manifest::new(argv, output_dir, command.clone());
    manifest.replayed_from = replayed_from;
    let result = dispatch(&command, &out, &mut manifest);
    manifest.status = match &result {
        Ok(()) => "ok".into(),
        Err(e) => format!("error: {e}"),
    };
    out.write_json("manifest.json", &manifest)?;
    result
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(argv, &cli.output_dir, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
