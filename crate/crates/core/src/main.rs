fn main() {
    std::process::exit(cavity_dce::cli::main());
}
