use std::process::ExitCode;

use clap::Parser;
use filtex_cli::{execute, thread_count, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match thread_count() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    ExitCode::from(pool.install(|| execute(cli)) as u8)
}
