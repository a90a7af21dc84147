fn main() {
    std::process::exit(kacrice::cli::main_with_args(std::env::args_os()));
}
