use clap::Parser;
use spikeslab::cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(&cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
