use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(sentilevel::cli::run(std::env::args_os()))
}
