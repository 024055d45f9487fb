fn main() {
    std::process::exit(matround::cli::main_with_args(std::env::args_os()));
}
