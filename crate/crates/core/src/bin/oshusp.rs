fn main() {
    std::process::exit(oshusp::cli::main_with(std::env::args_os()));
}
