use clap::Parser;

use ddca_cli::cli::{run_command, Cli};

fn main() {
    let code = match Cli::try_parse() {
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                0
            } else {
                eprint!("{err}");
                1
            }
        }
        Ok(cli) => match run_command(cli) {
            Ok(()) => 0,
            Err(err) => {
                eprintln!("error: {err}");
                err.exit_code()
            }
        },
    };
    std::process::exit(code);
}
