fn main() {
    std::process::exit(lieball::cli::run(std::env::args()));
}
