fn main() {
    std::process::exit(ipi_cli::run(std::env::args_os()));
}
