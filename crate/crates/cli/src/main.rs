fn main() {
    std::process::exit(erratum_cli::run(std::env::args_os()));
}
