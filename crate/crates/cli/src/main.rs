fn main() {
    std::process::exit(gridcap_cli::commands::run(std::env::args_os()));
}
