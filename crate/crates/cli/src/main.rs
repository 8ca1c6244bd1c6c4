fn main() {
    std::process::exit(lo_dynamics_cli::run(std::env::args_os()));
}
