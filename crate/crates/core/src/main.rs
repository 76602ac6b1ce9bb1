fn main() {
    std::process::exit(mill1::cli::run(std::env::args_os()));
}
