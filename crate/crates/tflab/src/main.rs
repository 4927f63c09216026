fn main() {
    std::process::exit(tflab::harness::run_cli(std::env::args()));
}
