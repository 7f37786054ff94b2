use std::process::ExitCode;

fn main() -> ExitCode {
    sharp_radon_cli::run(std::env::args_os())
}
