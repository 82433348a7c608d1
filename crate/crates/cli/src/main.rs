use clap::Parser;
use effham_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = effham_cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
