fn main() {
    std::process::exit(mcc::cli::run(std::env::args_os()));
}
