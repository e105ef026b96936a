fn main() {
    std::process::exit(minipol::cli::run())
}
