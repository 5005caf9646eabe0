use std::process::ExitCode;

fn main() -> ExitCode {
    let code = dbarg_cli::run(std::env::args_os(), std::env::vars(), &mut std::io::stdout(), &mut std::io::stderr());
    ExitCode::from(code as u8)
}
