fn main() {
    std::process::exit(kreg_cli::run(std::env::args_os()));
}
