fn main() {
    std::process::exit(pmlab::cli::main());
}
