fn main() {
    std::process::exit(womlab::cli::main_with_args(std::env::args_os()));
}
