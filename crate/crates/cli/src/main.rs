fn main() {
    std::process::exit(mcnet_cli::run_from_args(std::env::args_os()));
}
