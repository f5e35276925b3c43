fn main() {
    std::process::exit(hyperifs::cli::run(std::env::args_os()));
}
