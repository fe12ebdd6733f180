fn main() {
    std::process::exit(bohmdyn_cli::run(std::env::args_os()));
}
