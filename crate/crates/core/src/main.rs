fn main() {
    std::process::exit(qinterference::cli::run(std::env::args_os()));
}
