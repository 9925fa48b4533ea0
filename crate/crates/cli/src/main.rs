fn main() {
    std::process::exit(fiberpair_cli::run(std::env::args_os()));
}
