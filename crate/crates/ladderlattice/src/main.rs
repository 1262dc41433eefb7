fn main() {
    std::process::exit(ladderlattice::cli::run(std::env::args_os()));
}
