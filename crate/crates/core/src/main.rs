use std::process::ExitCode;

fn main() -> ExitCode {
    fopid::cli::main_with_args(std::env::args_os())
}
