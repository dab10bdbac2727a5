use std::process::ExitCode;

use clap::Parser;
use sepdec_cli::{run, Cli};

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("SEPDEC_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .expect("global pool is built once");
            }
            _ => {
                eprintln!("error: SEPDEC_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    ExitCode::from(run(cli) as u8)
}
