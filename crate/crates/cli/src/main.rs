fn main() {
    std::process::exit(conelab_cli::run(std::env::args_os()));
}
