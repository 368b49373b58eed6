fn main() {
    std::process::exit(proplint::run());
}
