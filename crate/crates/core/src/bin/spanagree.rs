fn main() {
    std::process::exit(spanagree::cli::main());
}
