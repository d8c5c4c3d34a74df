fn main() {
    std::process::exit(subobstacle_cli::run(std::env::args_os()));
}
