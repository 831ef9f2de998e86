fn main() {
    std::process::exit(secmc::cli::run_from_env());
}
