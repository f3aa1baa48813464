fn main() {
    let code = inflation_lab::cli::cli_main(std::env::args_os());
    std::process::exit(code);
}
