use clap::Parser;

fn main() -> std::process::ExitCode {
    gtconv::cli::run(gtconv::cli::Cli::parse())
}
