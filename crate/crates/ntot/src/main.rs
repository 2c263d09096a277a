fn main() {
    std::process::exit(ntot::cli::run(std::env::args_os()));
}
