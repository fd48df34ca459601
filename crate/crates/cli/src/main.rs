use std::process::ExitCode;

fn main() -> ExitCode {
    hopgraph_cli::run(std::env::args_os())
}
