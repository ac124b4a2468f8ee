use clap::Parser;
use ontokit_cli::{finish, run, Cli};

fn main() {
    let cli = Cli::parse();
    std::process::exit(finish(run(&cli.command)));
}
