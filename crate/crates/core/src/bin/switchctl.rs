fn main() {
    std::process::exit(switchctl::cli::main());
}
