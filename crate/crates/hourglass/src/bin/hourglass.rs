fn main() {
    std::process::exit(hourglass::sweep::cli_main());
}
