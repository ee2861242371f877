fn main() {
    std::process::exit(levy_langevin_cli::run(std::env::args_os()));
}
