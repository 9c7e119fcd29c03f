fn main() {
    std::process::exit(detcal::cli::run());
}
