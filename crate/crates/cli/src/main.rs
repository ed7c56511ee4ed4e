fn main() {
    std::process::exit(landau_cli::main_with_args(std::env::args_os()));
}
