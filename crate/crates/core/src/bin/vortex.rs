fn main() {
    std::process::exit(vortex::cli::main_with_args(std::env::args_os()));
}
