use std::process::ExitCode;

fn main() -> ExitCode {
    natural_spectrum::cli::run(std::env::args_os())
}
