fn main() {
    let code = causabound_cli::run(std::env::args().collect());
    std::process::exit(code);
}
