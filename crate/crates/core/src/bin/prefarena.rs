use clap::Parser;

use prefarena_core::cli::{run_cli, CliCommand};

fn main() {
    let cmd = CliCommand::parse();
    std::process::exit(run_cli(&cmd));
}
