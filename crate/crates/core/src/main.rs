fn main() {
    std::process::exit(vfl::harness::cli::main_cli(std::env::args_os()));
}
