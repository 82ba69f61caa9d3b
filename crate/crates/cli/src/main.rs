use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(chernoff_cli::run(std::env::args_os()))
}
