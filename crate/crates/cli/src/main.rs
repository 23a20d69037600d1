fn main() {
    std::process::exit(rspscrn_cli::run(std::env::args_os()));
}
