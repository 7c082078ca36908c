fn main() {
    std::process::exit(higgsalg::cli::main());
}
