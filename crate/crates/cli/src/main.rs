fn main() {
    std::process::exit(cavity_exciton_cli::run_experiment(std::env::args_os()));
}
