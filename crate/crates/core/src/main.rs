fn main() {
    std::process::exit(homology_census::cli::main_with_args(std::env::args_os()));
}
