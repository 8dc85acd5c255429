fn main() {
    std::process::exit(dynbarrier::cli::main_with(std::env::args_os()));
}
