fn main() {
    std::process::exit(sagarch::cli::main_with_args(std::env::args_os()));
}
