fn main() {
    std::process::exit(repsig::cli::run(std::env::args_os()));
}
