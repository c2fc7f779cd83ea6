fn main() {
    std::process::exit(cran_duality::cli::run());
}
