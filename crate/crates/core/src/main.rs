fn main() {
    std::process::exit(cspace_belief::cli::run(std::env::args_os()));
}
