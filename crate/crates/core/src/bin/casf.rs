fn main() {
    std::process::exit(casf::cli::run(std::env::args_os()));
}
