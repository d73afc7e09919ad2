fn main() {
    std::process::exit(qxroute_cli::run(std::env::args_os()));
}
