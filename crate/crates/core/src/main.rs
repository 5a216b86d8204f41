fn main() {
    std::process::exit(adherence::cli::run(std::env::args_os()));
}
