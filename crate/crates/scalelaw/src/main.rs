use std::process::ExitCode;

fn main() -> ExitCode {
    scalelaw::cli::run()
}
