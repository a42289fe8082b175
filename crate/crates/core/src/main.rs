fn main() {
    std::process::exit(schedreach::cli::main());
}
