use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(dualprec_bench::run(std::env::args_os()))
}
