fn main() {
    std::process::exit(graftok::cli::main());
}
