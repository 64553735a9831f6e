fn main() {
    std::process::exit(descent::cli::run(std::env::args_os()));
}
