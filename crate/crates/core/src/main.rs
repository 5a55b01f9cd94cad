fn main() {
    std::process::exit(gyre::cli::run(std::env::args()));
}
