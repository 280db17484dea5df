fn main() {
    std::process::exit(ustat::experiment::run(std::env::args_os()));
}
