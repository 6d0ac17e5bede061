fn main() {
    std::process::exit(specshape::cli::main_with_args(std::env::args_os()));
}
