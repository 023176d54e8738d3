fn main() {
    std::process::exit(frft_optics_cli::run(std::env::args_os()));
}
