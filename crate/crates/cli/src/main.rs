fn main() {
    std::process::exit(fockbench_cli::run(std::env::args_os()));
}
