use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(adrsplit::cli::run(std::env::args_os()))
}
