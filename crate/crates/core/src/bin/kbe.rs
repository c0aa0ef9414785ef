fn main() {
    std::process::exit(kbemu::cli::main());
}
