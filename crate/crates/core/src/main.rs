fn main() {
    std::process::exit(feasidist::cli::run(std::env::args_os()));
}
