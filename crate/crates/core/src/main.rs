fn main() {
    std::process::exit(heightlab::cli::main_with_env());
}
