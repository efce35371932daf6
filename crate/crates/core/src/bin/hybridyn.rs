fn main() {
    std::process::exit(hybridyn::cli::cli_main(std::env::args_os()));
}
