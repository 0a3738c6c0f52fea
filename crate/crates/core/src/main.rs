fn main() {
    std::process::exit(factor_select::cli::main_with_args(std::env::args_os()));
}
