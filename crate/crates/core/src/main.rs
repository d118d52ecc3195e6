fn main() {
    std::process::exit(rspace_lab::cli_report::run(std::env::args_os()));
}
