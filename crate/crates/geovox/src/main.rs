use clap::Parser;

use geovox::cli::{Cli, Command};
use geovox::config::threads_from_env;
use geovox::pipeline;

fn main() {
    let cli = Cli::parse();
    // Validated cap on internal parallelism; the pipeline is sequential, so
    // any cap is honored. 0 means auto.
    if let Err(e) = threads_from_env() {
        eprintln!("error: {e}");
        std::process::exit(2);
    }
    let result = match &cli.command {
        Command::Synth(args) => pipeline::cmd_synth(args),
        Command::Feature(args) => pipeline::cmd_feature(args),
        Command::Covfeat(args) => pipeline::cmd_covfeat(args),
        Command::Track(args) => pipeline::cmd_track(args),
        Command::Analyze { command } => pipeline::cmd_analyze(command),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
