use std::process::ExitCode;

use clap::Parser;
use k3lat_cli::{execute, Cli};

fn main() -> ExitCode {
    // clap exits with 2 on usage errors and 0 for --help
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(out) => {
            println!("{}", out.render(cli.json));
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
