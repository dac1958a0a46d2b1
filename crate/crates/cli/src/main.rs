fn main() {
    std::process::exit(monosi_cli::run(std::env::args_os()));
}
