fn main() {
    std::process::exit(dpmatch::cli::run(std::env::args_os()));
}
