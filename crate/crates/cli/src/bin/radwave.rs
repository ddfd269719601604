fn main() {
    std::process::exit(radwave_cli::main_with_args(std::env::args_os()));
}
