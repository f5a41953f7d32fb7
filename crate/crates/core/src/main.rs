fn main() {
    std::process::exit(vcdim::cli::run(std::env::args_os()));
}
