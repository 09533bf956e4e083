fn main() {
    std::process::exit(prolatoscope::cli::run(std::env::args_os()));
}
