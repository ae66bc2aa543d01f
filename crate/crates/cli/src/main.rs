fn main() {
    std::process::exit(cascadekit_cli::run(std::env::args_os()));
}
