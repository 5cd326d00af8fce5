fn main() {
    std::process::exit(relcomp::cli::run(std::env::args_os()));
}
