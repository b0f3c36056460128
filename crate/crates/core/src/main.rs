fn main() {
    std::process::exit(swrdm::cli::run(std::env::args_os()));
}
