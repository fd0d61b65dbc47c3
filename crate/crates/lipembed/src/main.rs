fn main() {
    std::process::exit(lipembed::cli::main_with(std::env::args_os()));
}
