fn main() {
    std::process::exit(kglab_cli::run(std::env::args_os()));
}
