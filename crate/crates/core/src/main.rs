use clap::Parser;

use entmeas::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("entmeas: {}", e.message());
        std::process::exit(e.exit_code());
    }
}
