fn main() {
    std::process::exit(grouplab::cli::run(std::env::args_os()));
}
