fn main() {
    std::process::exit(curvlie::cli::run());
}
