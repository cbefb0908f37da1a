use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(nojulia::cli::run(std::env::args_os()))
}
