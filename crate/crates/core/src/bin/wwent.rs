fn main() {
    std::process::exit(ww_entangle::cli::run_cli(std::env::args_os()));
}
