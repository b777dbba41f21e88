fn main() {
    std::process::exit(proxnet::cli::main_with_args(std::env::args_os()));
}
