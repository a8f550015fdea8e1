fn main() {
    std::process::exit(hypspin_cli::app::main_with_args(std::env::args_os()));
}
