fn main() {
    std::process::exit(rumorflow_cli::run(std::env::args_os()));
}
