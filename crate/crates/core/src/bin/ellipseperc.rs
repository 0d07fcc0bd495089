fn main() {
    std::process::exit(ellipseperc::cli::run(std::env::args_os()));
}
