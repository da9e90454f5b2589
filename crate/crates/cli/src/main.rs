fn main() {
    std::process::exit(ito_cli::run(std::env::args_os()));
}
