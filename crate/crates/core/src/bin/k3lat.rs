fn main() {
    std::process::exit(k3lat::cli::main_with_args(std::env::args_os()));
}
