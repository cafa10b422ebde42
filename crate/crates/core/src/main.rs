use std::io::Write;
use std::process::ExitCode;

use tangherlini::cli::{run, MODE_VAR};

fn main() -> ExitCode {
    let mode = std::env::var(MODE_VAR).ok();
    let outcome = run(std::env::args_os(), mode.as_deref());
    // a closed pipe is not worth a panic
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    ExitCode::from(outcome.code as u8)
}
