fn main() {
    std::process::exit(smsd::harness::cli::run(std::env::args_os()));
}
