fn main() {
    std::process::exit(magictrap_cli::run(std::env::args_os()));
}
