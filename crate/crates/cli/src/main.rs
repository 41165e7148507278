fn main() {
    std::process::exit(wirl_cli::main_with_args(std::env::args_os()));
}
