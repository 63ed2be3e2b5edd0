fn main() {
    std::process::exit(sn_bound_cli::run(std::env::args_os()));
}
