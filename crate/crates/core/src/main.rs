fn main() {
    std::process::exit(cmdviz::cli::run(std::env::args_os()));
}
