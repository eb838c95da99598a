fn main() {
    std::process::exit(slantlab::cli::run_cli(std::env::args_os()));
}
