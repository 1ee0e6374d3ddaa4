fn main() {
    std::process::exit(multiamdahl::cli::run(std::env::args_os()));
}
