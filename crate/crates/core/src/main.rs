fn main() {
    std::process::exit(resonant_waves::harness::cli_run(std::env::args_os()));
}
