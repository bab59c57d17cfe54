fn main() {
    std::process::exit(horoshrinker::cli::run(std::env::args_os()));
}
