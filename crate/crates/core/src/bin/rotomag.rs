fn main() {
    std::process::exit(rotomag::cli::main_with_args(std::env::args_os()));
}
