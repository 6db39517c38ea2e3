fn main() {
    std::process::exit(ctphs::cli::main_with_args(std::env::args_os()));
}
