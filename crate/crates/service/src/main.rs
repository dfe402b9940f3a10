use std::process::ExitCode;

fn main() -> ExitCode {
    bevalkit::cli::main()
}
