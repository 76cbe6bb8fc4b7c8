fn main() {
    std::process::exit(wildrisk::cli::run(std::env::args_os()));
}
