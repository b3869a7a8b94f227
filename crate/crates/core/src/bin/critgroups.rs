use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let out = critical_groups::cli::main_with_args(std::env::args_os());
    let _ = if out.to_stderr {
        std::io::stderr().write_all(out.text.as_bytes())
    } else {
        std::io::stdout().write_all(out.text.as_bytes())
    };
    ExitCode::from(out.exit_code)
}
