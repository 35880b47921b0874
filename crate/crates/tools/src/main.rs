fn main() {
    std::process::exit(scenegraph_tools::cli::run(std::env::args_os()));
}
