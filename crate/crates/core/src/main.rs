fn main() {
    std::process::exit(aan_core::cli::run(std::env::args_os()));
}
