fn main() {
    std::process::exit(avstl::cli::main());
}
