fn main() {
    std::process::exit(structured_lm::cli::main());
}
