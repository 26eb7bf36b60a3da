//! Command-line front end: `ecs spectrum | oracle-compare | verify | qseries`.
//! Exit codes: 0 ok, 2 resonance, 3 no convergence, 4 configuration,
//! 5 failed check, 1 anything else.

pub mod commands;
pub mod config;
pub mod output;

use clap::{Parser, Subcommand};
use config::CommonArgs;

#[derive(Debug, Parser)]
#[command(name = "ecs", version, about = "Elliptic Calogero-Sutherland eigenvalues and eigenfunctions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for E_n and α with the chosen method(s)
    Spectrum(CommonArgs),
    /// Compare the solvers against the truncated-matrix oracle
    OracleCompare(CommonArgs),
    /// Run the identity and bound checks
    Verify(CommonArgs),
    /// η-graded terms over a grid of nomes with fitted q-powers
    Qseries(CommonArgs),
}

pub fn run() -> i32 {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (args, cmd): (&CommonArgs, fn(&config::RunConfig) -> crate::Result<()>) = match &cli.command {
        Command::Spectrum(a) => (a, commands::cmd_spectrum),
        Command::OracleCompare(a) => (a, commands::cmd_oracle_compare),
        Command::Verify(a) => (a, commands::cmd_verify),
        Command::Qseries(a) => (a, commands::cmd_qseries),
    };
    match args.resolve().and_then(|cfg| cmd(&cfg)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
