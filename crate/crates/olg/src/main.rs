fn main() {
    std::process::exit(olg::cli::main_with_args(std::env::args_os()));
}
