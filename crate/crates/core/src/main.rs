fn main() {
    std::process::exit(regsolve::cli::run(std::env::args_os()));
}
