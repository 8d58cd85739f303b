fn main() {
    std::process::exit(degdet_cli::cli_main(std::env::args_os().skip(1)));
}
