use clap::Parser;
use seedforge::cli::{Cli, Command};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Gen(args) => seedforge::cli::run_gen(args),
        Command::Stats(args) => seedforge::cli::run_stats(args),
    };
    std::process::exit(code);
}
