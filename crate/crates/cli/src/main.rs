mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use commands::Failure;
use config::{Cli, Command, RunConfig};

fn run(cli: Cli) -> Result<(), Failure> {
    let (cmd, args): (fn(&RunConfig) -> _, _) = match cli.command {
        Command::Sample(a) => (commands::cmd_sample, a),
        Command::Bottlenecks(a) => (commands::cmd_bottlenecks, a),
        Command::Reach(a) => (commands::cmd_reach, a),
        Command::Homology(a) => (commands::cmd_homology, a),
        Command::Solve(a) => (commands::cmd_solve, a),
    };
    let cfg = RunConfig::resolve(args).map_err(Failure::usage)?;
    if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    cmd(&cfg).map(|_| ())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            println!("{}", serde_json::to_string_pretty(&f.to_json()).expect("json"));
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
