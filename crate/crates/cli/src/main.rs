mod args;
mod cmd;
mod error;
mod output;
mod select;

use clap::Parser;

use args::{Cli, Command};
use error::{config, CliResult};

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("FILTRA_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| config(format!("FILTRA_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| config(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match &cli.command {
        Command::Metrics(a) => cmd::metrics::run(a),
        Command::Standardness(a) => cmd::standardness::run(a),
        Command::Simulate(c) => cmd::simulate::run(c),
        Command::Embed(a) => cmd::embed::run(a),
        Command::Eulerian(a) => cmd::eulerian::run(a),
        Command::Export(a) => cmd::export::run(a),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("filtra: {e}");
        std::process::exit(e.exit_code());
    }
}
