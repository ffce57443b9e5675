use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(article9::cli::run(std::env::args_os()))
}
