fn main() {
    std::process::exit(mskit::cli::main_with_args(std::env::args_os()));
}
