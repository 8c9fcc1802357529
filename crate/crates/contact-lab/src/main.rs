fn main() {
    std::process::exit(contact_lab::cli::run_from_args());
}
