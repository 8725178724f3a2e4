fn main() {
    std::process::exit(abcis::cli::main_entry());
}
