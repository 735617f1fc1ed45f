use std::process::ExitCode;

fn main() -> ExitCode {
    let code = xifv::cli::main_with_args(std::env::args_os().collect());
    ExitCode::from(code as u8)
}
