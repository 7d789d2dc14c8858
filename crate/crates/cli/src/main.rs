use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use cosmic_bell_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    // a panic anywhere below is a broken invariant, not bad input
    let result = std::panic::catch_unwind(|| run(&cli));
    match result {
        Ok(Ok(out)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.text.as_bytes()).is_err() {
                return ExitCode::from(3);
            }
            ExitCode::SUCCESS
        }
        Ok(Err(e)) => {
            eprintln!("cosmic-bell: {e}");
            ExitCode::from(e.exit_code())
        }
        Err(_) => ExitCode::from(3),
    }
}
