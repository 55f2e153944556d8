fn main() {
    std::process::exit(dispkit::cli::main_with_args(std::env::args_os()));
}
