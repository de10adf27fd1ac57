fn main() {
    std::process::exit(roadtrack_cli::run(std::env::args_os()));
}
