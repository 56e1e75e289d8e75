fn main() {
    std::process::exit(colombeau_cli::run(std::env::args_os()));
}
