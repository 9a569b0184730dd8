fn main() {
    std::process::exit(eland::cli::main_entry());
}
