fn main() {
    std::process::exit(aqpt::cli::main_with_args(std::env::args_os()));
}
