//! `isocov` command-line entry point.

fn main() {
    std::process::exit(isocov::cli::run(std::env::args_os()));
}
