fn main() {
    std::process::exit(fiberwalk_cli::run_cli(std::env::args_os()));
}
