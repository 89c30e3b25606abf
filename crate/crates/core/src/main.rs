fn main() {
    std::process::exit(twincf::cli::run(std::env::args_os()));
}
