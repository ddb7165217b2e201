use std::io::{self, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    let out = jetsym_cli::run(std::env::args_os(), &mut io::stdin());
    let _ = io::stdout().write_all(out.stdout.as_bytes());
    let _ = io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.code as u8)
}
