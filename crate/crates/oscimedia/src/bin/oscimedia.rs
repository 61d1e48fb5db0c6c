fn main() {
    std::process::exit(oscimedia::cli::main());
}
