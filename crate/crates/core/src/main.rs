fn main() {
    std::process::exit(odgen::cli::run(std::env::args_os()));
}
