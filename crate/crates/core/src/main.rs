fn main() {
    std::process::exit(zeroday_core::cli::run(std::env::args_os()));
}
