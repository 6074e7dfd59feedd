fn main() {
    std::process::exit(tailratio::cli::main_with(std::env::args_os()));
}
