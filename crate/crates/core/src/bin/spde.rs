fn main() {
    std::process::exit(spde_core::cli::run(std::env::args_os()));
}
