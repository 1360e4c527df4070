fn main() {
    std::process::exit(poolside::cli::cli_main(std::env::args_os()));
}
