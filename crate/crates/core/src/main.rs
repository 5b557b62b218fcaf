fn main() {
    std::process::exit(harmonia::cli::run(std::env::args_os()));
}
