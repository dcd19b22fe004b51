fn main() {
    std::process::exit(kink_lab::main_with(std::env::args_os()));
}
