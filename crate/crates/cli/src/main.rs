fn main() {
    std::process::exit(cddr_cli::run(std::env::args_os()));
}
