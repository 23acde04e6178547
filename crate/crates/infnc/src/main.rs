use std::process::ExitCode;

fn main() -> ExitCode {
    infnc::cli::main()
}
