use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let out = poussin_cli::run(std::env::args_os());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    if std::io::stdout().write_all(out.stdout.as_bytes()).is_err() {
        return ExitCode::from(poussin_cli::exit::IO as u8);
    }
    ExitCode::from(out.code as u8)
}
