fn main() {
    std::process::exit(faultbands::cli::run());
}
