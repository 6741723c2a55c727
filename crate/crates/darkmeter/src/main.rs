fn main() {
    std::process::exit(darkmeter::cli::run());
}
