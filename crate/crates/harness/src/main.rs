fn main() {
    std::process::exit(projfgd_harness::cli::main_with_args(std::env::args_os()));
}
