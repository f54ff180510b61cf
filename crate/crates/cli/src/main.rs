fn main() {
    std::process::exit(ris_cli::run());
}
