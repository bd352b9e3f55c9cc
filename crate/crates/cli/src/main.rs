use clap::Parser;

use phononherald_cli::args::Cli;
use phononherald_cli::{exit, run::run};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PHONONHERALD_LOG", "warn")).init();
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
