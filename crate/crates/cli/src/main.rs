fn main() {
    std::process::exit(catalysis_cli::dispatch(std::env::args_os()));
}
