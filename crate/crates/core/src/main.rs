use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let (code, out) = logq::cli::run_command(std::env::args_os());
    let written = if code == logq::cli::EXIT_OK {
        std::io::stdout().write_all(out.as_bytes())
    } else {
        std::io::stderr().write_all(out.as_bytes())
    };
    if written.is_err() {
        return ExitCode::from(2);
    }
    ExitCode::from(code as u8)
}
