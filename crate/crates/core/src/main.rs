fn main() {
    std::process::exit(nonholonomic::cli::run(std::env::args_os()));
}
