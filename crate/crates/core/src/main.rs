fn main() {
    std::process::exit(linnetcox::cli::run(std::env::args_os()));
}
