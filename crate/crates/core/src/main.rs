fn main() {
    std::process::exit(carleson_lab::run());
}
