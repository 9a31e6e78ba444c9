use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    match hfsmlab::run(std::env::args_os()) {
        Ok(text) => {
            if let Some(text) = text {
                let _ = writeln!(std::io::stdout(), "{}", text.trim_end());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
