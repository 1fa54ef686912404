fn main() {
    std::process::exit(specdens::cli::main_with_args(std::env::args_os()));
}
