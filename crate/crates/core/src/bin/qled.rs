use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(qled::cli::run_from(std::env::args_os()))
}
