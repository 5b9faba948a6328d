fn main() {
    std::process::exit(pseudomed::cli::run());
}
