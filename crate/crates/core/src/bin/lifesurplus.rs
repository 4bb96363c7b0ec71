fn main() {
    std::process::exit(lifesurplus::cli::main());
}
