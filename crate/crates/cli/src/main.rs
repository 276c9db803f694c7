use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use bpetk_cli::{run, Cli, Streams};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdin = io::stdin();
    let mut stdin = stdin.lock();
    let mut stdout = BufWriter::new(io::stdout().lock());
    let mut stderr = io::stderr().lock();
    let result = run(
        cli,
        &mut Streams {
            stdin: &mut stdin,
            stdout: &mut stdout,
            stderr: &mut stderr,
        },
    );
    let flushed = stdout.flush();
    match result {
        Ok(()) => match flushed {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                let _ = writeln!(stderr, "bpetk: <stdout>: {e}");
                ExitCode::from(3)
            }
        },
        Err(e) => {
            let message = e.to_string();
            if !message.is_empty() {
                let _ = writeln!(stderr, "bpetk: {message}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
