fn main() {
    std::process::exit(ftsum_cli::run(std::env::args_os()));
}
