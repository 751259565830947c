fn main() {
    std::process::exit(klab_cli::main_with_args(std::env::args_os()));
}
