fn main() {
    std::process::exit(asep_duality::cli::main_with(std::env::args_os()));
}
